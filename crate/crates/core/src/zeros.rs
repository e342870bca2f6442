//! First zeros of `u^{(j)}` on a half-line and the `z₁ = z₃` continuation.
//!
//! Zeros are located by scanning the propagated jet at a fixed resolution,
//! bracketing the first sign change, and refining by bisection followed by a
//! final secant step. The continuation in `B` for `u'''' = B·u` bisects on
//! the outcome of a race between the first zero of `u'` (`z₁`) and the first
//! zero of `u'''` (`z₃`): for large `B`, `u'` never vanishes and `z₃` wins;
//! for small `B`, `u'''` never vanishes and `z₁` wins.

use crate::error::{Error, Result};
use crate::kernel::{db_propagate, propagate, PiecewisePotential, StateVector4};

/// Number of scan intervals across a horizon.
pub const SCAN_DIVISIONS: usize = 4096;

/// Absolute bisection tolerance on zero positions.
pub const REFINE_TOL: f64 = 1e-12;

/// `|z₁ − z₃| < TIE_REL_TOL · max(1, z₁ − b)` counts as a tie.
pub const TIE_REL_TOL: f64 = 1e-10;

/// Horizon length for stiffness `B` before any doubling: `50 / max(1, B^{1/4})`.
pub const HORIZON_SCALE: f64 = 50.0;

/// Number of times an undecided horizon is doubled.
pub const HORIZON_DOUBLINGS: usize = 4;

/// Cap on doubling/halving steps while bracketing `B`.
pub const MAX_BRACKET_STEPS: usize = 60;

const MAX_BISECTION_STEPS: usize = 400;

/// First zero of `u^{(order)}` after the scan start, or `None` when no sign
/// change occurs before `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroLocation {
    pub order: usize,
    pub position: Option<f64>,
    pub horizon: f64,
}

impl ZeroLocation {
    pub fn is_found(&self) -> bool {
        self.position.is_some()
    }

    /// Position, with `+∞` standing for "not found".
    pub fn or_infinity(&self) -> f64 {
        self.position.unwrap_or(f64::INFINITY)
    }
}

/// First zeros `x₃ < x₂ < x₁ < x₀` of `u''' , u'', u', u` after `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOrdering {
    pub a: f64,
    pub x3: f64,
    pub x2: f64,
    pub x1: f64,
    pub x0: f64,
}

impl ZeroOrdering {
    pub fn is_strict(&self) -> bool {
        self.a < self.x3 && self.x3 < self.x2 && self.x2 < self.x1 && self.x1 < self.x0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceVerdict {
    Z3First,
    Z1First,
    TieWithinTol,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceOutcome {
    pub b: f64,
    pub verdict: RaceVerdict,
    pub z1: ZeroLocation,
    pub z3: ZeroLocation,
}

/// Values found while realizing the `z₁ = z₃` continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationBracket {
    /// Large-`B` bound: `u'` never vanishes.
    pub b_sharp: f64,
    /// Small-`B` bound: `u'''` never vanishes.
    pub b_flat: f64,
    /// Where `z₁` and `z₂` merge, when detected.
    pub b1: Option<f64>,
    pub b_star: f64,
    /// Common zero of `u'` and `u'''` at `b_star`.
    pub z_star: f64,
    pub z1: f64,
    pub z3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivitySigns {
    pub b: f64,
    pub dz1_db: f64,
    pub dz3_db: f64,
}

/// Scans all four derivative orders in one pass.
pub fn first_zeros(
    pot: &PiecewisePotential,
    start: &StateVector4,
    horizon: f64,
    scan_step: f64,
) -> Result<[ZeroLocation; 4]> {
    if !(horizon > start.x) {
        return Err(Error::Precondition(format!(
            "horizon {horizon} must exceed scan start {}",
            start.x
        )));
    }
    if !(scan_step > 0.0) {
        return Err(Error::Precondition(format!(
            "scan step must be positive, got {scan_step}"
        )));
    }
    let steps = ((horizon - start.x) / scan_step).ceil() as usize;
    let mut found: [Option<f64>; 4] = [None; 4];
    let mut prev_x = start.x;
    let mut prev = start.jet;
    for k in 1..=steps {
        let x = if k == steps {
            horizon
        } else {
            start.x + k as f64 * scan_step
        };
        let cur = propagate(pot, start, x)?.jet;
        for order in 0..4 {
            if found[order].is_some() {
                continue;
            }
            if cur[order] == 0.0 {
                found[order] = Some(x);
            } else if prev[order] != 0.0 && (prev[order] < 0.0) != (cur[order] < 0.0) {
                found[order] = Some(refine(
                    pot,
                    start,
                    order,
                    prev_x,
                    prev[order],
                    x,
                    cur[order],
                )?);
            }
        }
        if found.iter().all(Option::is_some) {
            break;
        }
        prev_x = x;
        prev = cur;
    }
    Ok(std::array::from_fn(|order| ZeroLocation {
        order,
        position: found[order],
        horizon,
    }))
}

fn refine(
    pot: &PiecewisePotential,
    start: &StateVector4,
    order: usize,
    mut lo: f64,
    mut flo: f64,
    mut hi: f64,
    mut fhi: f64,
) -> Result<f64> {
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= REFINE_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = propagate(pot, start, mid)?.jet[order];
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let t = flo / (flo - fhi);
    Ok(lo + t * (hi - lo))
}

/// First zero of `u^{(order)}` on `(start.x, horizon]`.
pub fn first_zero(
    order: usize,
    pot: &PiecewisePotential,
    start: &StateVector4,
    horizon: f64,
    scan_step: f64,
) -> Result<ZeroLocation> {
    if order > 3 {
        return Err(Error::Precondition(format!(
            "derivative order {order} not in 0..=3"
        )));
    }
    Ok(first_zeros(pot, start, horizon, scan_step)?[order])
}

/// Observation-1 zeros for `u'''' = −A·u` from a jet with all components positive.
pub fn observation1_zeros(a_coef: f64, start: &StateVector4) -> Result<ZeroOrdering> {
    if !(a_coef > 0.0) || !a_coef.is_finite() {
        return Err(Error::Precondition(format!(
            "A must be positive, got {a_coef}"
        )));
    }
    if start.jet.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition(format!(
            "all jet components must be positive, got {:?}",
            start.jet
        )));
    }
    let pot = PiecewisePotential::constant(a_coef);
    let mut len = HORIZON_SCALE * a_coef.powf(-0.25).max(1.0);
    for attempt in 0..=HORIZON_DOUBLINGS {
        let horizon = start.x + len;
        let z = first_zeros(&pot, start, horizon, len / SCAN_DIVISIONS as f64)?;
        if z.iter().all(ZeroLocation::is_found) {
            let ord = ZeroOrdering {
                a: start.x,
                x3: z[3].or_infinity(),
                x2: z[2].or_infinity(),
                x1: z[1].or_infinity(),
                x0: z[0].or_infinity(),
            };
            if !ord.is_strict() {
                return Err(Error::Ordering(format!("{ord:?}")));
            }
            return Ok(ord);
        }
        if attempt == HORIZON_DOUBLINGS {
            let missing = z.iter().find(|l| !l.is_found()).map_or(0, |l| l.order);
            return Err(Error::ZeroNotFound {
                order: missing,
                horizon,
            });
        }
        len *= 2.0;
    }
    unreachable!()
}

/// Rejects jets that do not have the sign pattern `u > 0, u' > 0, u'' < 0, u''' < 0`.
pub fn check_start_signs(start: &StateVector4) -> Result<()> {
    let [u, u1, u2, u3] = start.jet;
    if u > 0.0 && u1 > 0.0 && u2 < 0.0 && u3 < 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "jet {:?} does not satisfy u>0, u'>0, u''<0, u'''<0",
            start.jet
        )))
    }
}

/// Default horizon (absolute) for `u'''' = B·u` from `start`.
pub fn default_horizon(b: f64, start: &StateVector4) -> f64 {
    start.x + HORIZON_SCALE / b.powf(0.25).max(1.0)
}

fn stiffness_potential(b: f64) -> PiecewisePotential {
    PiecewisePotential::constant(-b)
}

/// Races `z₁` against `z₃` for `u'''' = B·u` within a fixed horizon.
pub fn z_race(b: f64, start: &StateVector4, horizon: f64) -> Result<RaceOutcome> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("B must be positive, got {b}")));
    }
    check_start_signs(start)?;
    let z = first_zeros(
        &stiffness_potential(b),
        start,
        horizon,
        (horizon - start.x) / SCAN_DIVISIONS as f64,
    )?;
    let (z1, z3) = (z[1], z[3]);
    let verdict = match (z1.position, z3.position) {
        (None, None) => RaceVerdict::Undecided,
        (None, Some(_)) => RaceVerdict::Z3First,
        (Some(_), None) => RaceVerdict::Z1First,
        (Some(p1), Some(p3)) => {
            if (p1 - p3).abs() < TIE_REL_TOL * (p1 - start.x).max(1.0) {
                RaceVerdict::TieWithinTol
            } else if p3 < p1 {
                RaceVerdict::Z3First
            } else {
                RaceVerdict::Z1First
            }
        }
    };
    Ok(RaceOutcome { b, verdict, z1, z3 })
}

/// Race with horizon doubling on an undecided outcome. `horizon = None`
/// selects [`default_horizon`].
pub fn z_race_auto(b: f64, start: &StateVector4, horizon: Option<f64>) -> Result<RaceOutcome> {
    let mut h = horizon.unwrap_or_else(|| default_horizon(b, start));
    let mut outcome = z_race(b, start, h)?;
    for _ in 0..HORIZON_DOUBLINGS {
        if outcome.verdict != RaceVerdict::Undecided {
            break;
        }
        h = start.x + 2.0 * (h - start.x);
        outcome = z_race(b, start, h)?;
    }
    Ok(outcome)
}

/// Minimum over `x ≥ 0` of the lower bound
/// `γ₁ + γ₂x + γ₃x²/2 + Bγ₀x³/6` for `u'` on `[0, z₁)`.
pub fn derivative_lower_bound_min(start: &StateVector4, b: f64) -> f64 {
    let [g0, g1, g2, g3] = start.jet;
    let cubic = |x: f64| g1 + g2 * x + 0.5 * g3 * x * x + b * g0 * x * x * x / 6.0;
    // critical points: g2 + g3 x + (B g0 / 2) x² = 0
    let qa = 0.5 * b * g0;
    let mut best = cubic(0.0);
    if qa != 0.0 {
        let disc = g3 * g3 - 4.0 * qa * g2;
        if disc >= 0.0 {
            let s = disc.sqrt();
            for x in [(-g3 - s) / (2.0 * qa), (-g3 + s) / (2.0 * qa)] {
                if x > 0.0 {
                    best = best.min(cubic(x));
                }
            }
        }
    }
    if qa < 0.0 {
        return f64::NEG_INFINITY;
    }
    best
}

/// Finds `(B♯, B♭)`: `B♯` by doubling from 1 until `z₃` wins the race and the
/// cubic lower bound for `u'` stays positive, `B♭` by halving from 1 until
/// `z₁` wins.
pub fn find_brackets(start: &StateVector4, horizon: Option<f64>) -> Result<(f64, f64)> {
    check_start_signs(start)?;
    let mut b_sharp = 1.0;
    let mut ok = false;
    for _ in 0..MAX_BRACKET_STEPS {
        let r = z_race_auto(b_sharp, start, horizon)?;
        if r.verdict == RaceVerdict::Z3First && derivative_lower_bound_min(start, b_sharp) > 0.0 {
            ok = true;
            break;
        }
        b_sharp *= 2.0;
    }
    if !ok {
        return Err(Error::Bracket(format!(
            "no large-B bound found after {MAX_BRACKET_STEPS} doublings"
        )));
    }
    let mut b_flat = 1.0f64.min(0.5 * b_sharp);
    ok = false;
    for _ in 0..MAX_BRACKET_STEPS {
        let r = z_race_auto(b_flat, start, horizon)?;
        if r.verdict == RaceVerdict::Z1First {
            ok = true;
            break;
        }
        b_flat *= 0.5;
    }
    if !ok {
        return Err(Error::Bracket(format!(
            "no small-B bound found after {MAX_BRACKET_STEPS} halvings"
        )));
    }
    Ok((b_sharp, b_flat))
}

/// Bisects on the race verdict between `B♭` and `B♯` until `z₁ = z₃`.
pub fn find_b_star(start: &StateVector4, horizon: Option<f64>) -> Result<ContinuationBracket> {
    let (b_sharp, b_flat) = find_brackets(start, horizon)?;
    let (mut lo, mut hi) = (b_flat, b_sharp);
    let mut hit: Option<RaceOutcome> = None;
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = if hi / lo > 2.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let r = z_race_auto(mid, start, horizon)?;
        match r.verdict {
            RaceVerdict::TieWithinTol => {
                hit = Some(r);
                break;
            }
            RaceVerdict::Z3First => hi = mid,
            RaceVerdict::Z1First => lo = mid,
            RaceVerdict::Undecided => {
                return Err(Error::Undecided {
                    b: mid,
                    horizon: r.z1.horizon,
                })
            }
        }
    }
    let r = hit.ok_or_else(|| {
        Error::Bracket(format!(
            "bisection collapsed to [{lo}, {hi}] without z1 = z3"
        ))
    })?;
    let (z1, z3) = (r.z1.or_infinity(), r.z3.or_infinity());
    let b_star = r.b;
    let b1 = detect_b1(start, b_star, b_sharp, horizon);
    Ok(ContinuationBracket {
        b_sharp,
        b_flat,
        b1,
        b_star,
        z_star: 0.5 * (z1 + z3),
        z1,
        z3,
    })
}

/// `u'` evaluated at the first zero of `u''`, if that zero exists.
fn derivative_at_first_inflection(
    b: f64,
    start: &StateVector4,
    horizon: Option<f64>,
) -> Option<f64> {
    let h = horizon.unwrap_or_else(|| default_horizon(b, start));
    let pot = stiffness_potential(b);
    let z = first_zeros(&pot, start, h, (h - start.x) / SCAN_DIVISIONS as f64).ok()?;
    let z2 = z[2].position?;
    propagate(&pot, start, z2).ok().map(|s| s.u1())
}

/// Locates `B₁`, where the minimum of `u'` (at `z₂`) touches zero, by
/// bisecting the sign of `u'(z₂)` on `(B*, B♯)`. Best effort.
fn detect_b1(start: &StateVector4, b_star: f64, b_sharp: f64, horizon: Option<f64>) -> Option<f64> {
    let f_lo = derivative_at_first_inflection(b_star, start, horizon)?;
    let f_hi = derivative_at_first_inflection(b_sharp, start, horizon)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return None;
    }
    let (mut lo, mut hi) = (b_star, b_sharp);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 * hi {
            break;
        }
        match derivative_at_first_inflection(mid, start, horizon) {
            Some(v) if v <= 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => return None,
        }
    }
    Some(0.5 * (lo + hi))
}

/// `dz₁/dB` and `dz₃/dB` by implicit differentiation of `u'(z₁) = 0` and
/// `u'''(z₃) = 0`, with `∂_B` terms from the sensitivity convolution.
pub fn zero_sensitivities(b: f64, start: &StateVector4) -> Result<SensitivitySigns> {
    let r = z_race_auto(b, start, None)?;
    let (z1, z3) = match (r.z1.position, r.z3.position) {
        (Some(z1), Some(z3)) => (z1, z3),
        _ => {
            return Err(Error::Precondition(format!(
                "z1 and z3 must both exist at B = {b}"
            )))
        }
    };
    let pot = stiffness_potential(b);
    let at1 = propagate(&pot, start, z1)?;
    let at3 = propagate(&pot, start, z3)?;
    if at1.u2().abs() < 1e-12 {
        return Err(Error::DegenerateZero(format!(
            "u''(z1) = {} at B = {b}",
            at1.u2()
        )));
    }
    if at3.u().abs() < 1e-12 {
        return Err(Error::DegenerateZero(format!(
            "u(z3) = {} at B = {b}",
            at3.u()
        )));
    }
    let d1 = db_propagate(b, start, z1)?.d[1];
    let d3 = db_propagate(b, start, z3)?.d[3];
    Ok(SensitivitySigns {
        b,
        dz1_db: -d1 / at1.u2(),
        dz3_db: -d3 / (b * at3.u()),
    })
}

/// One sample of the `z₁(B)`, `z₃(B)` curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCurvePoint {
    pub b: f64,
    pub z1: Option<f64>,
    pub z3: Option<f64>,
}

/// Samples `z₁(B)` and `z₃(B)` on `points` log-spaced values of `B` in `[b_lo, b_hi]`.
pub fn zero_curves(
    start: &StateVector4,
    b_lo: f64,
    b_hi: f64,
    points: usize,
) -> Result<Vec<ZeroCurvePoint>> {
    if !(b_lo > 0.0 && b_hi > b_lo) || points < 2 {
        return Err(Error::Precondition(format!(
            "need 0 < b_lo < b_hi and at least two points, got [{b_lo}, {b_hi}] x {points}"
        )));
    }
    let ratio = (b_hi / b_lo).ln();
    (0..points)
        .map(|i| {
            let b = b_lo * (ratio * i as f64 / (points - 1) as f64).exp();
            let r = z_race_auto(b, start, None)?;
            Ok(ZeroCurvePoint {
                b,
                z1: r.z1.position,
                z3: r.z3.position,
            })
        })
        .collect()
}
