//! Exact propagation of `u'''' = c·u` through Krylov functions.
//!
//! The Krylov functions `K0..K3` are the solutions of `w'''' = c·w` whose
//! derivative matrix at the origin is the identity, `K_j^{(i)}(0) = δ_ij`.
//! They are entire in `c`, satisfy `K_j' = K_{j-1}` for `j ≥ 1` and
//! `K_0' = c·K_3`, and reduce to `x^j / j!` at `c = 0`. `K_3` is the
//! fundamental solution used in the variation-of-parameters formula for
//! parameter sensitivities.
//!
//! A [`PiecewisePotential`] stores the coefficient `v` in `u'''' + v·u = 0`
//! piece by piece, so the stiffness on a piece is `c = -v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::sig17;
use crate::quadrature::adaptive_simpson;

/// Largest `|c|^{1/4}·|x|` accepted by [`krylov_eval`] and [`transfer_matrix`].
pub const KERNEL_ARG_CAP: f64 = 8.0;

/// Below this scaled argument the power series is used.
pub const SERIES_SWITCH: f64 = 1.5;

/// Absolute tolerance for the sensitivity convolution integrals.
pub const SENSITIVITY_QUAD_TOL: f64 = 1e-10;

/// Values of the four Krylov functions at `x` for stiffness `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovValues {
    pub x: f64,
    pub c: f64,
    pub k: [f64; 4],
}

impl KrylovValues {
    pub fn k0(&self) -> f64 {
        self.k[0]
    }
    pub fn k1(&self) -> f64 {
        self.k[1]
    }
    pub fn k2(&self) -> f64 {
        self.k[2]
    }
    pub fn k3(&self) -> f64 {
        self.k[3]
    }

    /// `K_j'''' = c·K_j`; for `j = 3` this is the closure value `c·K3`.
    pub fn fourth(&self, j: usize) -> f64 {
        self.c * self.k[j]
    }

    /// The `i`-th x-derivative of `K_j`, for `i, j ∈ 0..4`.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < 4 && j < 4);
        if i <= j {
            self.k[j - i]
        } else {
            self.c * self.k[j + 4 - i]
        }
    }
}

fn scaled_arg(x: f64, c: f64) -> f64 {
    c.abs().powf(0.25) * x.abs()
}

/// Evaluates `K0..K3` at `(x, c)`.
///
/// Uses the power series near the origin and the closed
/// trigonometric/hyperbolic forms elsewhere. Fails with
/// [`Error::Saturation`] when `|c|^{1/4}·|x|` exceeds [`KERNEL_ARG_CAP`].
pub fn krylov_eval(x: f64, c: f64) -> Result<KrylovValues> {
    if !x.is_finite() || !c.is_finite() {
        return Err(Error::Domain(format!(
            "non-finite kernel input x={x}, c={c}"
        )));
    }
    let scaled = scaled_arg(x, c);
    if scaled > KERNEL_ARG_CAP * (1.0 + 1e-12) {
        return Err(Error::Saturation {
            scaled,
            cap: KERNEL_ARG_CAP,
        });
    }
    let k = if scaled <= SERIES_SWITCH {
        krylov_series(x, c)
    } else {
        krylov_closed(x, c)
    };
    Ok(KrylovValues { x, c, k })
}

/// Power-series form `K_j = Σ_n c^n x^{4n+j} / (4n+j)!`, summed to convergence.
///
/// Valid at every argument, but loses relative accuracy for `c < 0` once
/// `|c|^{1/4}|x|` is large; [`krylov_eval`] switches to closed forms there.
pub fn krylov_series(x: f64, c: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    let x4c = c * x.powi(4);
    for (j, slot) in out.iter_mut().enumerate() {
        // first term x^j / j!
        let mut term = x.powi(j as i32) / [1.0, 1.0, 2.0, 6.0][j];
        let mut sum = term;
        let mut n = 0usize;
        loop {
            let m = (4 * n + j) as f64;
            term *= x4c / ((m + 1.0) * (m + 2.0) * (m + 3.0) * (m + 4.0));
            sum += term;
            n += 1;
            if term.abs() <= f64::EPSILON * 0.25 * sum.abs() || term == 0.0 || n > 400 {
                break;
            }
        }
        *slot = sum;
    }
    out
}

fn krylov_closed(x: f64, c: f64) -> [f64; 4] {
    if c > 0.0 {
        let s = c.powf(0.25);
        let t = s * x;
        let (sh, ch) = (t.sinh(), t.cosh());
        let (sn, cs) = t.sin_cos();
        [
            0.5 * (ch + cs),
            0.5 * (sh + sn) / s,
            0.5 * (ch - cs) / (s * s),
            0.5 * (sh - sn) / (s * s * s),
        ]
    } else if c < 0.0 {
        // u'''' = -4ω⁴u with the roots ω(±1 ± i)
        let w = (-c).powf(0.25) / std::f64::consts::SQRT_2;
        let p = w * x;
        let (sh, ch) = (p.sinh(), p.cosh());
        let (sn, cs) = p.sin_cos();
        let a1 = ch * cs;
        let a2 = ch * sn + sh * cs;
        let a3 = sh * sn;
        let a4 = ch * sn - sh * cs;
        [
            a1,
            a2 / (2.0 * w),
            a3 / (2.0 * w * w),
            a4 / (4.0 * w * w * w),
        ]
    } else {
        [1.0, x, 0.5 * x * x, x * x * x / 6.0]
    }
}

/// The 4-jet `(u, u', u'', u''')` of a solution at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector4 {
    #[serde(with = "sig17")]
    pub x: f64,
    #[serde(with = "sig17::array4")]
    pub jet: [f64; 4],
}

impl StateVector4 {
    pub fn new(x: f64, jet: [f64; 4]) -> Self {
        Self { x, jet }
    }

    pub fn u(&self) -> f64 {
        self.jet[0]
    }
    pub fn u1(&self) -> f64 {
        self.jet[1]
    }
    pub fn u2(&self) -> f64 {
        self.jet[2]
    }
    pub fn u3(&self) -> f64 {
        self.jet[3]
    }

    pub fn derivative(&self, order: usize) -> f64 {
        self.jet[order]
    }

    /// Same jet, placed at another abscissa.
    pub fn at(&self, x: f64) -> Self {
        Self { x, jet: self.jet }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x,
            jet: self.jet.map(|v| v * factor),
        }
    }

    /// Jet of `e^{k x}` evaluated at `x`.
    pub fn exponential(k: f64, x: f64) -> Self {
        let e = (k * x).exp();
        Self {
            x,
            jet: [e, k * e, k * k * e, k * k * k * e],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.jet.iter().all(|v| v.is_finite())
    }
}

/// Linear map carrying a 4-jet across a step `h` at constant stiffness `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix4 {
    pub entries: [[f64; 4]; 4],
    pub h: f64,
    pub c: f64,
}

impl TransferMatrix4 {
    pub fn identity(c: f64) -> Self {
        let mut entries = [[0.0; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { entries, h: 0.0, c }
    }

    fn from_kernels(kv: &KrylovValues, h: f64) -> Self {
        let mut entries = [[0.0; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = kv.derivative(i, j);
            }
        }
        Self {
            entries,
            h,
            c: kv.c,
        }
    }

    /// Transfer over an arbitrary step, split into equal substeps with
    /// `|c|^{1/4}·h_sub ≤ KERNEL_ARG_CAP`.
    pub fn spanning(h: f64, c: f64) -> Result<Self> {
        let scaled = scaled_arg(h, c);
        if !scaled.is_finite() {
            return Err(Error::Domain(format!("non-finite step h={h}, c={c}")));
        }
        let pieces = (scaled / KERNEL_ARG_CAP).ceil().max(1.0) as usize;
        let step = transfer_matrix(h / pieces as f64, c)?;
        let mut total = step;
        for _ in 1..pieces {
            total = step.compose(&total);
        }
        total.h = h;
        if total.entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Saturation {
                scaled,
                cap: f64::INFINITY,
            });
        }
        Ok(total)
    }

    /// `self · first`: apply `first`, then `self`.
    pub fn compose(&self, first: &TransferMatrix4) -> TransferMatrix4 {
        let mut entries = [[0.0; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..4)
                    .map(|k| self.entries[i][k] * first.entries[k][j])
                    .sum();
            }
        }
        TransferMatrix4 {
            entries,
            h: self.h + first.h,
            c: self.c,
        }
    }

    pub fn apply_jet(&self, jet: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| self.entries[i][k] * jet[k]).sum();
        }
        out
    }

    pub fn apply(&self, state: &StateVector4) -> StateVector4 {
        StateVector4 {
            x: state.x + self.h,
            jet: self.apply_jet(&state.jet),
        }
    }

    pub fn determinant(&self) -> f64 {
        det4(&self.entries)
    }
}

pub(crate) fn det4(m: &[[f64; 4]; 4]) -> f64 {
    // Laplace expansion with 2×2 minors of the first two rows
    let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
    let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
    let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
    let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
    let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
    let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
    let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
    let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
    let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
    let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
    let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
    let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

/// Single-step transfer matrix; column `j` is the 4-jet of `K_j` at `h`.
pub fn transfer_matrix(h: f64, c: f64) -> Result<TransferMatrix4> {
    let kv = krylov_eval(h, c)?;
    Ok(TransferMatrix4::from_kernels(&kv, h))
}

/// One constant piece `[left, right)` of a potential. `right` may be `+∞`
/// and `left` may be `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(with = "sig17")]
    pub left: f64,
    #[serde(with = "sig17")]
    pub right: f64,
    #[serde(with = "sig17")]
    pub value: f64,
}

/// Piecewise-constant coefficient `v(x)` of `u'''' + v(x)·u = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePotential {
    pieces: Vec<Piece>,
}

impl PiecewisePotential {
    /// Validates that pieces are non-empty, increasing and contiguous.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPotential("no pieces".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.left.is_nan() || p.right.is_nan() || !p.value.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "piece {i} has non-finite data"
                )));
            }
            if !(p.left < p.right) {
                return Err(Error::InvalidPotential(format!(
                    "piece {i} is empty or reversed: [{}, {})",
                    p.left, p.right
                )));
            }
            if i > 0 && pieces[i - 1].right != p.left {
                return Err(Error::InvalidPotential(format!(
                    "pieces {} and {i} are not contiguous",
                    i - 1
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// One piece covering the whole line.
    pub fn constant(value: f64) -> Self {
        Self {
            pieces: vec![Piece {
                left: f64::NEG_INFINITY,
                right: f64::INFINITY,
                value,
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.pieces[0].left,
            self.pieces[self.pieces.len() - 1].right,
        )
    }

    /// Interior breakpoints, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.left).collect()
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.right <= x);
        Some(idx.min(self.pieces.len() - 1))
    }

    /// Value at `x` using the left-closed convention. `None` outside the domain.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.piece_index(x).map(|i| self.pieces[i].value)
    }

    /// Same breakpoints, every value moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    value: p.value + delta,
                    ..*p
                })
                .collect(),
        }
    }

    /// Exact integral of the coefficient over `[a, b]` (`a ≤ b`), both inside the domain.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let lo = p.left.max(a);
                let hi = p.right.min(b);
                if hi > lo {
                    (hi - lo) * p.value
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Propagates `start` to `target_x` through `pot`, composing exact per-piece
/// transfer matrices.
pub fn propagate(
    pot: &PiecewisePotential,
    start: &StateVector4,
    target_x: f64,
) -> Result<StateVector4> {
    if !start.is_finite() || !target_x.is_finite() {
        return Err(Error::Domain("non-finite propagation input".into()));
    }
    if target_x < start.x {
        return Err(Error::Precondition(format!(
            "target {target_x} lies before start {}",
            start.x
        )));
    }
    let mut idx = pot
        .piece_index(start.x)
        .ok_or_else(|| Error::Domain(format!("start {} outside potential domain", start.x)))?;
    if pot.piece_index(target_x).is_none() {
        return Err(Error::Domain(format!(
            "target {target_x} outside potential domain"
        )));
    }
    let mut x = start.x;
    let mut jet = start.jet;
    while x < target_x {
        let piece = pot.pieces[idx];
        let seg_end = piece.right.min(target_x);
        let h = seg_end - x;
        if h > 0.0 {
            let tm =
                TransferMatrix4::spanning(h, -piece.value).map_err(|e| Error::Propagation {
                    piece: idx,
                    left: piece.left,
                    right: piece.right,
                    reason: e.to_string(),
                })?;
            jet = tm.apply_jet(&jet);
            if jet.iter().any(|v| !v.is_finite()) {
                return Err(Error::Propagation {
                    piece: idx,
                    left: piece.left,
                    right: piece.right,
                    reason: "solution overflowed".into(),
                });
            }
        }
        x = seg_end;
        if x < target_x {
            idx += 1;
        }
    }
    Ok(StateVector4 { x: target_x, jet })
}

/// `∂_B` of the 4-jet of a solution of `u'''' = B·u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityState {
    pub x: f64,
    pub d: [f64; 4],
}

/// Sensitivity of the solution of `u'''' = B·u` with `B`-independent data
/// at `start.x`, through the convolution
/// `∂_B u^{(i)}(x) = ∫ K_{3-i}(x - ξ; B) u(ξ; B) dξ` over `[start.x, x]`.
pub fn db_propagate(b: f64, start: &StateVector4, target_x: f64) -> Result<SensitivityState> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("sensitivity needs B > 0, got {b}")));
    }
    if target_x < start.x {
        return Err(Error::Precondition(format!(
            "target {target_x} lies before start {}",
            start.x
        )));
    }
    let len = target_x - start.x;
    let mut d = [0.0; 4];
    if len == 0.0 {
        return Ok(SensitivityState { x: target_x, d });
    }
    // validate the whole span once so the integrands cannot fail
    TransferMatrix4::spanning(len, b)?;
    let solution = |s: f64| -> f64 {
        let tm = TransferMatrix4::spanning(s, b).expect("validated span");
        (0..4).map(|j| tm.entries[0][j] * start.jet[j]).sum()
    };
    for (i, slot) in d.iter_mut().enumerate() {
        let integrand = |s: f64| {
            let kernel = TransferMatrix4::spanning(len - s, b).expect("validated span");
            kernel.entries[i][3] * solution(s)
        };
        *slot = adaptive_simpson(integrand, 0.0, len, SENSITIVITY_QUAD_TOL);
    }
    Ok(SensitivityState { x: target_x, d })
}
