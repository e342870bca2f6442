//! Numerical evidence that a constructed `λ` is an eigenvalue embedded in
//! (discretized) continuous spectrum.

pub mod eigen;
pub mod grid;
pub mod report;
pub mod shooting;

pub use eigen::{symmetric_eigen, SymMatrix, SymmetricEigen};
pub use grid::{
    discretize_quartic, discretize_schrodinger, discretize_schrodinger_and_square, GridOperator,
};
pub use report::{
    detect_embedded, inverse_participation_ratio, EmbeddingCriteria, SpectralReport, Verdict,
};
pub use shooting::{shoot_piecewise, shoot_point_interaction, shoot_singular, InteractionShot};

use crate::error::Result;

/// Full eigendecomposition of a grid operator.
pub fn eigensolve_symmetric(op: &GridOperator) -> Result<SymmetricEigen> {
    symmetric_eigen(&op.matrix)
}
