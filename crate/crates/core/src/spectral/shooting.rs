//! Shooting mismatch functions whose roots are the constructed eigenvalues.

use std::f64::consts::FRAC_PI_4;

use crate::construction::{EmbeddedPotentialSpec, Parity, PointInteraction};
use crate::error::{Error, Result};
use crate::kernel::{propagate, StateVector4, TransferMatrix4};

/// Result of shooting across a point interaction at a trial `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionShot {
    pub lambda: f64,
    /// Smallest singular value of the map to the non-decaying coefficients.
    pub mismatch: f64,
    /// Unit coefficients of the interior basis pair minimizing the mismatch.
    pub coefficients: [f64; 2],
    pub parity: Parity,
}

impl InteractionShot {
    /// Interior solution `p·K_a + r·K_b` (odd: `K1, K3`; even: `K0, K2`) at `|x| ≤ c`.
    pub fn interior_value(&self, x: f64) -> Result<f64> {
        let tm = TransferMatrix4::spanning(x.abs(), self.lambda)?;
        let (ja, jb) = interior_basis(self.parity);
        let v = self.coefficients[0] * tm.entries[0][ja] + self.coefficients[1] * tm.entries[0][jb];
        Ok(if x < 0.0 {
            self.parity.derivative_sign(0) * v
        } else {
            v
        })
    }
}

fn interior_basis(parity: Parity) -> (usize, usize) {
    match parity {
        Parity::Odd => (1, 3),
        Parity::Even => (0, 2),
    }
}

/// Coefficients of `e^{k(x−c)}`, `cos k(x−c)`, `sin k(x−c)` in the expansion of
/// a jet at `c` over `{e^{−k(x−c)}, e^{k(x−c)}, cos k(x−c), sin k(x−c)}`.
fn growing_coefficients(jet: &[f64; 4], k: f64) -> [f64; 3] {
    let [w0, w1, w2, w3] = *jet;
    let (k2, k3) = (k * k, k * k * k);
    [
        0.25 * ((w0 + w2 / k2) + (w1 / k + w3 / k3)),
        0.5 * (w0 - w2 / k2),
        0.5 * (w1 / k - w3 / k3),
    ]
}

/// Shoots the parity-`parity` interior family of `u'''' = λu` through the
/// interaction at `c > 0` and measures how far the exterior solution is from
/// pure `e^{−kx}` decay, `k = λ^{1/4}`.
///
/// The mismatch is the smallest singular value of the 3×2 map from the two
/// interior coefficients to the growing and oscillating exterior
/// coefficients; it vanishes exactly at eigenvalues with that parity.
pub fn shoot_point_interaction(
    parity: Parity,
    interaction: &PointInteraction,
    lambda: f64,
) -> Result<InteractionShot> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "shooting needs lambda > 0, got {lambda}"
        )));
    }
    if !(interaction.c > 0.0) {
        return Err(Error::Precondition("interaction must sit at c > 0".into()));
    }
    let k = lambda.powf(0.25);
    let tm = TransferMatrix4::spanning(interaction.c, lambda)?;
    let (ja, jb) = interior_basis(parity);
    let column = |j: usize| -> [f64; 3] {
        let jet = [
            tm.entries[0][j],
            tm.entries[1][j],
            tm.entries[2][j],
            tm.entries[3][j],
        ];
        growing_coefficients(&interaction.cross(jet), k)
    };
    let (ca, cb) = (column(ja), column(jb));
    let (mismatch, coefficients) = smallest_singular_pair(&ca, &cb);
    Ok(InteractionShot {
        lambda,
        mismatch,
        coefficients,
        parity,
    })
}

/// Smallest singular value of the 3×2 matrix `[a b]` and its right singular vector.
fn smallest_singular_pair(a: &[f64; 3], b: &[f64; 3]) -> (f64, [f64; 2]) {
    let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    // thin QR by modified Gram-Schmidt with one reorthogonalization pass
    let r11 = dot(a, a).sqrt();
    if r11 == 0.0 {
        return (0.0, [1.0, 0.0]);
    }
    let q1 = a.map(|v| v / r11);
    let mut r12 = dot(&q1, b);
    let mut rest: [f64; 3] = std::array::from_fn(|i| b[i] - r12 * q1[i]);
    let corr = dot(&q1, &rest);
    r12 += corr;
    rest = std::array::from_fn(|i| rest[i] - corr * q1[i]);
    let r22 = dot(&rest, &rest).sqrt();
    // RᵀR = [[p, q], [q, s]]
    let (p, q, s) = (r11 * r11, r11 * r12, r12 * r12 + r22 * r22);
    let half_diff = 0.5 * (p - s);
    let big = 0.5 * (p + s) + half_diff.hypot(q);
    let sigma_max = big.sqrt();
    let sigma_min = (r11 * r22).abs() / sigma_max;
    let theta = 0.5 * (2.0 * q).atan2(p - s);
    let (sn, cs) = theta.sin_cos();
    (sigma_min, [-sn, cs])
}

/// The odd example's interaction: `−2δ′ + 4δ` at `3π/4`.
pub fn singular_interaction() -> PointInteraction {
    PointInteraction::new(3.0 * FRAC_PI_4, -2.0, 4.0)
}

/// Mismatch of the odd point-interaction problem at `λ`; zero at `λ = 1`.
pub fn shoot_singular(lambda: f64) -> Result<f64> {
    Ok(shoot_point_interaction(Parity::Odd, &singular_interaction(), lambda)?.mismatch)
}

/// `(u'(0), u'''(0))` for the solution equal to `scale·e^{λ^{1/4}x}` left of `a`.
pub fn shoot_piecewise_scaled(
    spec: &EmbeddedPotentialSpec,
    lambda: f64,
    scale: f64,
) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "shooting needs lambda > 0, got {lambda}"
        )));
    }
    let pot = spec.eigen_potential(lambda);
    let start = StateVector4::exponential(lambda.powf(0.25), spec.a).scaled(scale);
    let end = propagate(&pot, &start, 0.0)?;
    Ok((end.u1(), end.u3()))
}

/// `(u'(0), u'''(0))` for the solution equal to `e^{λ^{1/4}x}` left of `a`;
/// both vanish exactly when `λ` carries an even L² eigenfunction.
pub fn shoot_piecewise(spec: &EmbeddedPotentialSpec, lambda: f64) -> Result<(f64, f64)> {
    shoot_piecewise_scaled(spec, lambda, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_known_matrix() {
        // columns (3,0,0) and (0,4,0): singular values 4 and 3
        let (s, v) = smallest_singular_pair(&[3.0, 0.0, 0.0], &[0.0, 4.0, 0.0]);
        assert!((s - 3.0).abs() < 1e-14);
        assert!((v[0].abs() - 1.0).abs() < 1e-14 && v[1].abs() < 1e-14);
        let (s, v) = smallest_singular_pair(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert!(s < 1e-15);
        // null vector ∝ (2, −1)
        assert!((v[0] / v[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(shoot_singular(0.0).is_err());
        assert!(shoot_singular(-1.0).is_err());
    }
}
