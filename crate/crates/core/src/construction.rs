//! Operators with an embedded eigenvalue and their eigenfunctions.
//!
//! Three families are built here:
//!
//! * a pair of δ/δ′ point interactions at `±3π/4` with eigenvalue 1, whose
//!   eigenfunction is the odd extension of `sin x` glued to `A·e^{-x}`, and
//!   the even variant at `±π/4` built from `cos x`;
//! * an even piecewise-constant potential with eigenvalue `k₀⁴`, obtained by
//!   matching `e^{k₀x}` through a barrier `A` and a well `−B` so that `g'`
//!   and `g'''` vanish together at the symmetry point;
//! * the square `H²` of a Schrödinger operator `H = −d²/dx² + V`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::sig17;
use crate::kernel::{propagate, Piece, PiecewisePotential, StateVector4};
use crate::quadrature::adaptive_simpson;
use crate::zeros::{check_start_signs, find_b_star, observation1_zeros, ContinuationBracket};

/// `|g'(0)| + |g'''(0)|` above which a synthesized eigenfunction is rejected.
pub const MATCHING_REJECT_TOL: f64 = 1e-6;

/// Half-width of emitted eigenfunction grids, in units of the decay length.
pub const GRID_HALF_WIDTH: f64 = 25.0;

pub const DEFAULT_GRID_STEP: f64 = 1e-3;

const B_PLACEMENT_RETRIES: usize = 8;

/// A `β·δ′(x − c) + γ·δ(x − c)` interaction.
///
/// Acting on a `C¹` function it is equivalent to the jumps
/// `[u''](c) = −β·u(c)` and `[u'''](c) = β·u'(c) − γ·u(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointInteraction {
    #[serde(with = "sig17")]
    pub c: f64,
    #[serde(with = "sig17")]
    pub beta: f64,
    #[serde(with = "sig17")]
    pub gamma: f64,
}

impl PointInteraction {
    pub fn new(c: f64, beta: f64, gamma: f64) -> Self {
        Self { c, beta, gamma }
    }

    /// Recovers `(β, γ)` from the observed jumps of `u''` and `u'''`.
    pub fn from_jumps(c: f64, u_c: f64, up_c: f64, jump_u2: f64, jump_u3: f64) -> Result<Self> {
        if u_c == 0.0 {
            return Err(Error::Domain(
                "u(c) = 0: the δ′ and δ coefficients are not identifiable".into(),
            ));
        }
        let beta = -jump_u2 / u_c;
        let gamma = (beta * up_c - jump_u3) / u_c;
        Ok(Self { c, beta, gamma })
    }

    /// The interaction of `Q(−x)`: `δ′(−x − c) = −δ′(x + c)`.
    pub fn mirrored(&self) -> Self {
        Self {
            c: -self.c,
            beta: -self.beta,
            gamma: self.gamma,
        }
    }

    /// Jumps `(Δu'', Δu''')` across the interaction.
    pub fn jumps(&self, u_c: f64, up_c: f64) -> (f64, f64) {
        interface_jumps(self, u_c, up_c)
    }

    /// Applies the jumps to a jet taken just left of `c`.
    pub fn cross(&self, jet: [f64; 4]) -> [f64; 4] {
        let (j2, j3) = self.jumps(jet[0], jet[1]);
        [jet[0], jet[1], jet[2] + j2, jet[3] + j3]
    }
}

/// `(Δu'', Δu''') = (−β·u(c), β·u'(c) − γ·u(c))`.
pub fn interface_jumps(pi: &PointInteraction, u_c: f64, up_c: f64) -> (f64, f64) {
    (-pi.beta * u_c, pi.beta * up_c - pi.gamma * u_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    /// Sign relating `f^{(order)}(−x)` to `f^{(order)}(x)`.
    pub fn derivative_sign(self, order: usize) -> f64 {
        let base = match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        if order.is_multiple_of(2) {
            base
        } else {
            -base
        }
    }
}

/// Point-interaction operator `d⁴/dx⁴ + Σ (β_i δ′ + γ_i δ)(x − c_i)` with an
/// eigenfunction that is trigonometric inside `|x| < c` and `amplitude·e^{-|x|}` outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularExample {
    #[serde(with = "sig17")]
    pub amplitude: f64,
    pub interfaces: Vec<PointInteraction>,
    #[serde(with = "sig17")]
    pub lambda: f64,
    pub parity: Parity,
}

/// Which side of an interface a one-sided limit is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl SingularExample {
    /// The interface location `c > 0`.
    pub fn matching_point(&self) -> f64 {
        self.interfaces
            .iter()
            .map(|p| p.c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn half_line_jet(&self, x: f64, inner: bool) -> [f64; 4] {
        if inner {
            let (s, c) = x.sin_cos();
            match self.parity {
                Parity::Odd => [s, c, -s, -c],
                Parity::Even => [c, -s, -c, s],
            }
        } else {
            let e = self.amplitude * (-x).exp();
            [e, -e, e, -e]
        }
    }

    /// Closed-form jet of the eigenfunction; at an interface the limit from `side`.
    pub fn jet(&self, x: f64, side: Side) -> [f64; 4] {
        let c = self.matching_point();
        let ax = x.abs();
        // on the mirrored side, Left/Right swap relative to |x|
        let toward_origin = if x >= 0.0 {
            side == Side::Left
        } else {
            side == Side::Right
        };
        let inner = ax < c || (ax == c && toward_origin);
        let jet = self.half_line_jet(ax, inner);
        if x >= 0.0 {
            jet
        } else {
            std::array::from_fn(|i| self.parity.derivative_sign(i) * jet[i])
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x, Side::Right)[0]
    }

    /// `(jet from the left, jet from the right)` at `x`.
    pub fn one_sided_jets(&self, x: f64) -> ([f64; 4], [f64; 4]) {
        (self.jet(x, Side::Left), self.jet(x, Side::Right))
    }

    /// `∫ f²` over the line, by adaptive quadrature of the closed form.
    pub fn norm_squared(&self) -> f64 {
        let c = self.matching_point();
        let tail_end = c + 40.0;
        let inner = adaptive_simpson(|x| self.value(x).powi(2), 0.0, c, 1e-13);
        let outer = adaptive_simpson(|x| self.value(x).powi(2), c, tail_end, 1e-13);
        2.0 * (inner + outer)
    }
}

/// Sampled eigenfunction on a symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub lambda: f64,
    pub decay_rate: f64,
    pub parity: Parity,
}

impl EigenfunctionSample {
    /// Least-squares slope of `ln|v|` over the outer 20% of the grid on each
    /// side, returned as positive decay rates `(left, right)`.
    pub fn fitted_decay_rates(&self) -> (f64, f64) {
        let n = self.grid.len();
        let cut = n / 5;
        let left = log_slope(&self.grid[..cut], &self.values[..cut]);
        let right = log_slope(&self.grid[n - cut..], &self.values[n - cut..]);
        (left, -right)
    }

    pub fn to_csv(&self) -> String {
        crate::io::samples_csv(self.lambda, &self.grid, &self.values)
    }
}

fn log_slope(xs: &[f64], vs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(vs)
        .filter(|(_, v)| **v != 0.0)
        .map(|(x, v)| (*x, v.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Grid `{i·step : |i·step| ≤ half_width}`, symmetric about 0 exactly.
pub fn symmetric_grid(half_width: f64, step: f64) -> Vec<f64> {
    let m = (half_width / step * (1.0 + 1e-12)).floor() as i64;
    (-m..=m).map(|i| i as f64 * step).collect()
}

fn singular_like(grid_step: f64, parity: Parity) -> Result<(SingularExample, EigenfunctionSample)> {
    if !(grid_step > 0.0) || !grid_step.is_finite() {
        return Err(Error::Precondition(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let (c, amplitude) = match parity {
        Parity::Odd => (3.0 * FRAC_PI_4, (3.0 * FRAC_PI_4).exp() * FRAC_1_SQRT_2),
        Parity::Even => (FRAC_PI_4, FRAC_PI_4.exp() * FRAC_1_SQRT_2),
    };
    let mut ex = SingularExample {
        amplitude,
        interfaces: Vec::new(),
        lambda: 1.0,
        parity,
    };
    // interfaces at ±c recovered from the closed-form jumps
    ex.interfaces = vec![
        PointInteraction::new(-c, 0.0, 0.0),
        PointInteraction::new(c, 0.0, 0.0),
    ];
    let derived = [-c, c]
        .iter()
        .map(|&x| {
            let (l, r) = ex.one_sided_jets(x);
            PointInteraction::from_jumps(x, l[0], l[1], r[2] - l[2], r[3] - l[3])
        })
        .collect::<Result<Vec<_>>>()?;
    ex.interfaces = derived;
    let grid = symmetric_grid(GRID_HALF_WIDTH, grid_step);
    let values = grid.iter().map(|&x| ex.value(x)).collect();
    let sample = EigenfunctionSample {
        grid,
        values,
        lambda: ex.lambda,
        decay_rate: 1.0,
        parity,
    };
    Ok((ex, sample))
}

/// The odd example: `sin x` on `|x| < 3π/4`, `±A·e^{-|x|}` outside, with
/// `A = e^{3π/4}/√2`, eigenvalue 1. The right interface is
/// `−2δ′ + 4δ` at `3π/4`; the left one is its mirror image.
pub fn singular_example(grid_step: f64) -> Result<(SingularExample, EigenfunctionSample)> {
    let (mut ex, sample) = singular_like(grid_step, Parity::Odd)?;
    let right = PointInteraction::new(3.0 * FRAC_PI_4, -2.0, 4.0);
    ex.interfaces = vec![right.mirrored(), right];
    Ok((ex, sample))
}

/// Even variant: `cos x` on `|x| < π/4`, `(e^{π/4}/√2)·e^{-|x|}` outside. The
/// interaction coefficients are derived from the computed jumps.
pub fn even_variant(grid_step: f64) -> Result<(SingularExample, EigenfunctionSample)> {
    singular_like(grid_step, Parity::Even)
}

/// Even piecewise-constant potential `q` with `L = d⁴/dx⁴ + q` having the
/// eigenvalue `k₀⁴`. `pieces` covers `x ≤ 0`: `0` on `(−∞, a)`, `A + k₀⁴` on
/// `[a, b)`, `−B + k₀⁴` on `[b, 0)`; `q(x) = q(−x)` for `x > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedPotentialSpec {
    #[serde(with = "sig17")]
    pub k0: f64,
    #[serde(with = "sig17")]
    pub a: f64,
    #[serde(with = "sig17")]
    pub b: f64,
    #[serde(rename = "A", with = "sig17")]
    pub barrier: f64,
    #[serde(rename = "B", with = "sig17")]
    pub well: f64,
    /// Matching point before the shift that moved it to 0.
    #[serde(with = "sig17")]
    pub zeta: f64,
    pub pieces: PiecewisePotential,
    pub even_extension: bool,
}

impl EmbeddedPotentialSpec {
    pub fn lambda(&self) -> f64 {
        self.k0.powi(4)
    }

    /// Assembles the half-line pieces from the scalar fields.
    pub fn half_line_pieces(
        k0: f64,
        a: f64,
        b: f64,
        barrier: f64,
        well: f64,
    ) -> Result<PiecewisePotential> {
        let k4 = k0.powi(4);
        PiecewisePotential::new(vec![
            Piece {
                left: f64::NEG_INFINITY,
                right: a,
                value: 0.0,
            },
            Piece {
                left: a,
                right: b,
                value: barrier + k4,
            },
            Piece {
                left: b,
                right: 0.0,
                value: -well + k4,
            },
        ])
    }

    /// Checks field ranges and that `pieces` agrees with the scalar fields.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.k0, self.a, self.b, self.barrier, self.well, self.zeta]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Inconsistent("non-finite field".into()));
        }
        if !(self.k0 > 0.0 && self.barrier > 0.0 && self.well > 0.0) {
            return Err(Error::Inconsistent("k0, A and B must be positive".into()));
        }
        if !(self.a < self.b && self.b < 0.0) {
            return Err(Error::Inconsistent(format!(
                "need a < b < 0, got a={}, b={}",
                self.a, self.b
            )));
        }
        if !self.even_extension {
            return Err(Error::Inconsistent("even extension marker missing".into()));
        }
        let expected = Self::half_line_pieces(self.k0, self.a, self.b, self.barrier, self.well)?;
        if expected != self.pieces {
            return Err(Error::Inconsistent(
                "pieces disagree with (k0, a, b, A, B)".into(),
            ));
        }
        Ok(())
    }

    /// `q` on the whole line, mirrored exactly about 0.
    pub fn full_potential(&self) -> PiecewisePotential {
        let half = self.pieces.pieces();
        let mut pieces: Vec<Piece> = half.to_vec();
        for p in half.iter().rev() {
            pieces.push(Piece {
                left: -p.right,
                right: -p.left,
                value: p.value,
            });
        }
        // merge the two pieces that meet at 0
        let mid = half.len();
        if pieces[mid - 1].value == pieces[mid].value {
            let right = pieces[mid].right;
            pieces[mid - 1].right = right;
            pieces.remove(mid);
        }
        PiecewisePotential::new(pieces).expect("mirrored pieces stay contiguous")
    }

    /// Coefficient of `u'''' + (q − λ)u = 0` at `λ`.
    pub fn eigen_potential(&self, lambda: f64) -> PiecewisePotential {
        self.full_potential().shifted(-lambda)
    }
}

/// Builds the even potential for `k₀ > 0`, left edge `a < 0` and barrier `A > 0`.
///
/// `a` is the left edge before the final shift; the emitted spec is translated
/// so the matching point sits at 0, and its `a` field is the shifted edge.
pub fn build_embedded_potential(k0: f64, a: f64, barrier: f64) -> Result<EmbeddedPotentialSpec> {
    build_with_bracket(k0, a, barrier).map(|(spec, _)| spec)
}

/// Jet at the barrier/well interface `b` (pre-shift coordinates) of the
/// solution equal to `e^{k₀(x−a)}` at `a`.
///
/// `b` starts at the midpoint of the first zeros of `u''` and `u'` and moves
/// toward the latter until the jet has the sign pattern
/// `u > 0, u' > 0, u'' < 0, u''' < 0`.
pub fn well_start(k0: f64, a: f64, barrier: f64) -> Result<StateVector4> {
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(Error::Precondition(format!(
            "k0 must be positive, got {k0}"
        )));
    }
    if !(a < 0.0) || !a.is_finite() {
        return Err(Error::Precondition(format!("a must be negative, got {a}")));
    }
    if !(barrier > 0.0) || !barrier.is_finite() {
        return Err(Error::Precondition(format!(
            "A must be positive, got {barrier}"
        )));
    }
    // normalized to 1 at a so the scan works at unit scale
    let jet_a = StateVector4::new(a, [1.0, k0, k0 * k0, k0 * k0 * k0]);
    let ord = observation1_zeros(barrier, &jet_a)?;
    let barrier_pot = PiecewisePotential::constant(barrier);
    let mut b = 0.5 * (ord.x2 + ord.x1);
    let mut jet_b = propagate(&barrier_pot, &jet_a, b)?;
    let mut tries = 0;
    while check_start_signs(&jet_b).is_err() {
        if tries == B_PLACEMENT_RETRIES {
            return Err(Error::Precondition(format!(
                "jet at b = {b} never reached u>0, u'>0, u''<0, u'''<0"
            )));
        }
        b = 0.5 * (b + ord.x1);
        jet_b = propagate(&barrier_pot, &jet_a, b)?;
        tries += 1;
    }
    Ok(jet_b)
}

/// As [`build_embedded_potential`], also returning the continuation bracket
/// (in coordinates relative to `b`'s pre-shift position).
pub fn build_with_bracket(
    k0: f64,
    a: f64,
    barrier: f64,
) -> Result<(EmbeddedPotentialSpec, ContinuationBracket)> {
    let jet_b = well_start(k0, a, barrier)?;
    let b = jet_b.x;
    let bracket = find_b_star(&jet_b, None)?;
    let zeta = bracket.z_star;
    let (a_s, b_s) = (a - zeta, b - zeta);
    let pieces = EmbeddedPotentialSpec::half_line_pieces(k0, a_s, b_s, barrier, bracket.b_star)?;
    let spec = EmbeddedPotentialSpec {
        k0,
        a: a_s,
        b: b_s,
        barrier,
        well: bracket.b_star,
        zeta,
        pieces,
        even_extension: true,
    };
    Ok((spec, bracket))
}

/// Jet of `g` at `x ≤ 0`, with `g = e^{k₀x}` left of `a`.
fn left_jet(
    spec: &EmbeddedPotentialSpec,
    pot: &PiecewisePotential,
    start: &StateVector4,
    x: f64,
) -> Result<[f64; 4]> {
    if x <= spec.a {
        Ok(StateVector4::exponential(spec.k0, x).jet)
    } else {
        Ok(propagate(pot, start, x)?.jet)
    }
}

/// Jet of the even eigenfunction `g` at any `x`.
pub fn eigenfunction_jet(spec: &EmbeddedPotentialSpec, x: f64) -> Result<[f64; 4]> {
    let pot = spec.eigen_potential(spec.lambda());
    let start = StateVector4::exponential(spec.k0, spec.a);
    if x <= 0.0 {
        left_jet(spec, &pot, &start, x)
    } else {
        let j = left_jet(spec, &pot, &start, -x)?;
        Ok(std::array::from_fn(|i| {
            Parity::Even.derivative_sign(i) * j[i]
        }))
    }
}

/// `(g'(0), g'''(0))` for the eigenfunction started as `e^{k₀x}` left of `a`.
pub fn matching_residual(spec: &EmbeddedPotentialSpec) -> Result<(f64, f64)> {
    let j = eigenfunction_jet(spec, 0.0)?;
    Ok((j[1], j[3]))
}

/// Samples the even eigenfunction on `[−25/k₀, 25/k₀]`.
pub fn synthesize_eigenfunction(
    spec: &EmbeddedPotentialSpec,
    grid_step: f64,
) -> Result<EigenfunctionSample> {
    if !(grid_step > 0.0) || !grid_step.is_finite() {
        return Err(Error::Precondition(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let (g1, g3) = matching_residual(spec)?;
    if g1.abs() + g3.abs() > MATCHING_REJECT_TOL {
        return Err(Error::Inconsistent(format!(
            "|g'(0)| + |g'''(0)| = {:e} exceeds {MATCHING_REJECT_TOL:e}",
            g1.abs() + g3.abs()
        )));
    }
    let lambda = spec.lambda();
    let pot = spec.eigen_potential(lambda);
    let start = StateVector4::exponential(spec.k0, spec.a);
    let grid = symmetric_grid(GRID_HALF_WIDTH / spec.k0, grid_step);
    let n = grid.len();
    let mut values = vec![0.0; n];
    let mid = n / 2;
    for i in 0..=mid {
        values[i] = left_jet(spec, &pot, &start, grid[i])?[0];
    }
    for i in mid + 1..n {
        values[i] = values[n - 1 - i];
    }
    Ok(EigenfunctionSample {
        grid,
        values,
        lambda,
        decay_rate: spec.k0,
        parity: Parity::Even,
    })
}

/// Boxed real sampler.
pub type Sampler = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A Schrödinger potential `V` with its first two derivatives and known
/// bound-state energies `κ₁ < κ₂ < … < 0`.
pub struct SchrodingerSquareSpec {
    pub label: String,
    pub v: Sampler,
    pub dv: Sampler,
    pub ddv: Sampler,
    pub bound_states: Vec<f64>,
}

impl std::fmt::Debug for SchrodingerSquareSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchrodingerSquareSpec")
            .field("label", &self.label)
            .field("bound_states", &self.bound_states)
            .finish_non_exhaustive()
    }
}

impl SchrodingerSquareSpec {
    pub fn new(
        label: impl Into<String>,
        v: Sampler,
        dv: Sampler,
        ddv: Sampler,
        bound_states: Vec<f64>,
    ) -> Result<Self> {
        if bound_states.iter().any(|k| !(*k < 0.0)) {
            return Err(Error::Precondition(
                "bound-state energies must be negative".into(),
            ));
        }
        if bound_states.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Precondition(
                "bound-state energies must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            v,
            dv,
            ddv,
            bound_states,
        })
    }

    /// `V(x) = −2 sech²x`, with the single bound state `−1` (eigenfunction `sech x`).
    pub fn sech2_well() -> Self {
        fn sech(x: f64) -> f64 {
            1.0 / x.cosh()
        }
        Self {
            label: "sech2".into(),
            v: Box::new(|x| -2.0 * sech(x).powi(2)),
            dv: Box::new(|x| 4.0 * sech(x).powi(2) * x.tanh()),
            ddv: Box::new(|x| {
                let s2 = sech(x).powi(2);
                4.0 * s2 * (3.0 * s2 - 2.0)
            }),
            bound_states: vec![-1.0],
        }
    }
}

/// Coefficients of `L = H² = d⁴/dx⁴ + p₂ d²/dx² + p₁ d/dx + p₀`.
pub struct SquareOperator<'a> {
    spec: &'a SchrodingerSquareSpec,
}

impl SquareOperator<'_> {
    /// `(p₂, p₁, p₀) = (−2V, −2V′, V² − V″)`.
    pub fn coefficients(&self, x: f64) -> [f64; 3] {
        let v = (self.spec.v)(x);
        [
            -2.0 * v,
            -2.0 * (self.spec.dv)(x),
            v * v - (self.spec.ddv)(x),
        ]
    }

    /// `L u` at `x` from `(u, u', u'', u'''')`.
    pub fn apply(&self, x: f64, u: f64, u1: f64, u2: f64, u4: f64) -> f64 {
        let [p2, p1, p0] = self.coefficients(x);
        u4 + p2 * u2 + p1 * u1 + p0 * u
    }

    /// `κ_j²`, in decreasing order.
    pub fn predicted_eigenvalues(&self) -> Vec<f64> {
        self.spec.bound_states.iter().map(|k| k * k).collect()
    }

    pub fn spec(&self) -> &SchrodingerSquareSpec {
        self.spec
    }
}

pub fn schrodinger_square(spec: &SchrodingerSquareSpec) -> SquareOperator<'_> {
    SquareOperator { spec }
}
