//! Fourth-order operators `d⁴/dx⁴ + q` on the real line with an eigenvalue
//! embedded in the continuous spectrum `[0, ∞)`.
//!
//! * [`kernel`]: Krylov functions, transfer matrices and exact propagation
//!   for piecewise-constant coefficients, plus `∂_B` sensitivities.
//! * [`zeros`]: first zeros of `u^{(j)}` and the `z₁ = z₃` continuation in `B`.
//! * [`construction`]: the δ/δ′ point-interaction example and its even
//!   variant, the even piecewise-constant potential with eigenvalue `k₀⁴`,
//!   and the square of a Schrödinger operator.
//! * [`spectral`]: finite-difference discretizations, a dense symmetric
//!   eigensolver, localization diagnostics and shooting mismatch functions.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod construction;
pub mod error;
pub mod io;
pub mod kernel;
pub mod quadrature;
pub mod spectral;
pub mod zeros;

pub use construction::{
    build_embedded_potential, even_variant, interface_jumps, schrodinger_square, singular_example,
    synthesize_eigenfunction, EigenfunctionSample, EmbeddedPotentialSpec, Parity, PointInteraction,
    SchrodingerSquareSpec, SingularExample,
};
pub use error::{Error, Result};
pub use kernel::{
    db_propagate, krylov_eval, propagate, transfer_matrix, KrylovValues, Piece, PiecewisePotential,
    SensitivityState, StateVector4, TransferMatrix4,
};
pub use spectral::{
    detect_embedded, discretize_quartic, discretize_schrodinger_and_square, eigensolve_symmetric,
    shoot_piecewise, shoot_singular, GridOperator, SpectralReport, Verdict,
};
pub use zeros::{
    find_b_star, find_brackets, first_zero, observation1_zeros, z_race, zero_sensitivities,
    ContinuationBracket, RaceVerdict, SensitivitySigns, ZeroLocation, ZeroOrdering,
};
