//! Finite-difference operators on `[−X, X]` with `n` interior points.

use crate::error::{Error, Result};
use crate::kernel::PiecewisePotential;

use super::eigen::SymMatrix;

/// Smallest accepted number of interior points.
pub const MIN_POINTS: usize = 50;

/// A discretized operator with its interior grid `x_i = −X + i·h`, `i = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    pub half_width: f64,
    pub n: usize,
    pub h: f64,
    pub grid: Vec<f64>,
    pub matrix: SymMatrix,
}

fn interior_grid(half_width: f64, n: usize) -> Result<(f64, Vec<f64>)> {
    if n < MIN_POINTS {
        return Err(Error::Precondition(format!(
            "need n >= {MIN_POINTS}, got {n}"
        )));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::Precondition(format!(
            "half-width must be positive, got {half_width}"
        )));
    }
    let h = 2.0 * half_width / (n + 1) as f64;
    // fill the left half and mirror it so x_i = -x_{n-1-i} exactly
    let mut grid = vec![0.0; n];
    for i in 0..n / 2 {
        grid[i] = -half_width + (i + 1) as f64 * h;
        grid[n - 1 - i] = -grid[i];
    }
    Ok((h, grid))
}

/// `d⁴/dx⁴ + q` with the `(1, −4, 6, −4, 1)/h⁴` stencil, truncated at the
/// ends (`u = 0` at the two nearest exterior nodes on each side).
///
/// `q` enters as its exact average over each cell `[x_i − h/2, x_i + h/2]`,
/// so a breakpoint inside a cell contributes a deterministic weighted value.
pub fn discretize_quartic(
    q: &PiecewisePotential,
    half_width: f64,
    n: usize,
) -> Result<GridOperator> {
    let (h, grid) = interior_grid(half_width, n)?;
    let (lo, hi) = q.domain();
    if lo > -half_width - h || hi < half_width + h {
        return Err(Error::Precondition(
            "potential does not cover the grid".into(),
        ));
    }
    if q.breakpoints().iter().any(|b| b.abs() >= half_width) {
        return Err(Error::Precondition(format!(
            "half-width {half_width} does not contain the support of the potential"
        )));
    }
    let h4 = h.powi(4);
    let mut m = SymMatrix::zeros(n, 2);
    for (i, &x) in grid.iter().enumerate() {
        let cell = q.integral(x - 0.5 * h, x + 0.5 * h) / h;
        m.set(i, i, 6.0 / h4 + cell);
        if i + 1 < n {
            m.set(i, i + 1, -4.0 / h4);
        }
        if i + 2 < n {
            m.set(i, i + 2, 1.0 / h4);
        }
    }
    Ok(GridOperator {
        half_width,
        n,
        h,
        grid,
        matrix: m,
    })
}

/// Three-point `H = −d²/dx² + V` with Dirichlet ends.
pub fn discretize_schrodinger<F: Fn(f64) -> f64>(
    v: F,
    half_width: f64,
    n: usize,
) -> Result<GridOperator> {
    let (h, grid) = interior_grid(half_width, n)?;
    let h2 = h * h;
    let mut m = SymMatrix::zeros(n, 1);
    for (i, &x) in grid.iter().enumerate() {
        m.set(i, i, 2.0 / h2 + v(x));
        if i + 1 < n {
            m.set(i, i + 1, -1.0 / h2);
        }
    }
    Ok(GridOperator {
        half_width,
        n,
        h,
        grid,
        matrix: m,
    })
}

/// Returns `(H_n, L_n = H_n²)`, so that `spec(L_n) = spec(H_n)²` holds at
/// the matrix level.
pub fn discretize_schrodinger_and_square<F: Fn(f64) -> f64>(
    v: F,
    half_width: f64,
    n: usize,
) -> Result<(GridOperator, GridOperator)> {
    let hop = discretize_schrodinger(v, half_width, n)?;
    let a = &hop.matrix;
    let mut sq = SymMatrix::zeros(n, 2);
    for i in 0..n {
        for j in i..(i + 3).min(n) {
            let lo = j.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            let mut s = 0.0;
            for k in lo..=hi {
                s += a.get(i, k) * a.get(k, j);
            }
            sq.set(i, j, s);
        }
    }
    let lop = GridOperator {
        half_width,
        n,
        h: hop.h,
        grid: hop.grid.clone(),
        matrix: sq,
    };
    Ok((hop, lop))
}

impl GridOperator {
    /// Index of the mirror image of grid point `i`.
    pub fn reflect(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// `max |M_{ij} − M_{n-1-i, n-1-j}|`: zero when the operator commutes with reflection.
    pub fn reflection_defect(&self) -> f64 {
        let n = self.n;
        let bw = self.matrix.bandwidth();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                let d = self.matrix.get(i, j) - self.matrix.get(self.reflect(i), self.reflect(j));
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_and_spaced() {
        for n in [50, 51, 200, 201] {
            let (h, g) = interior_grid(10.0, n).unwrap();
            assert_eq!(g.len(), n);
            for i in 0..n {
                assert_eq!(g[i], -g[n - 1 - i]);
            }
            assert!((g[1] - g[0] - h).abs() < 1e-12);
            assert!((g[0] + 10.0 - h).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_n_and_narrow_domain() {
        let q = PiecewisePotential::constant(0.0);
        assert!(discretize_quartic(&q, 10.0, 49).is_err());
        let bumped = PiecewisePotential::new(vec![
            crate::kernel::Piece {
                left: f64::NEG_INFINITY,
                right: 12.0,
                value: 1.0,
            },
            crate::kernel::Piece {
                left: 12.0,
                right: f64::INFINITY,
                value: 0.0,
            },
        ])
        .unwrap();
        assert!(discretize_quartic(&bumped, 10.0, 100).is_err());
    }

    #[test]
    fn quartic_matrix_is_symmetric() {
        let op = discretize_quartic(&PiecewisePotential::constant(0.3), 5.0, 60).unwrap();
        assert!(op.matrix.is_symmetric());
        assert_eq!(op.matrix.get(3, 5), 1.0 / op.h.powi(4));
        assert!((op.matrix.get(3, 3) - 6.0 / op.h.powi(4) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn square_matches_dense_product() {
        let (hop, lop) =
            discretize_schrodinger_and_square(|x: f64| -2.0 / x.cosh().powi(2), 5.0, 60).unwrap();
        let n = hop.n;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n)
                    .map(|k| hop.matrix.get(i, k) * hop.matrix.get(k, j))
                    .sum();
                assert!((s - lop.matrix.get(i, j)).abs() <= 1e-12 * s.abs().max(1.0));
            }
        }
        assert!(lop.matrix.is_symmetric());
    }
}
