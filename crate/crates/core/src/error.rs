use thiserror::Error;

/// Errors raised by the kernel, zero-tracking, construction and spectral layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Kernel argument `|c|^{1/4}·|x|` is beyond the configured cap.
    #[error("kernel saturation: |c|^(1/4)*|x| = {scaled} exceeds cap {cap}")]
    Saturation { scaled: f64, cap: f64 },

    /// Propagation could not be completed across a potential piece.
    #[error("propagation failed in piece {piece} ([{left}, {right})): {reason}")]
    Propagation {
        piece: usize,
        left: f64,
        right: f64,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A first zero was expected within the scan horizon and none was found.
    #[error("no zero of u^({order}) within horizon {horizon}")]
    ZeroNotFound { order: usize, horizon: f64 },

    /// Observation-1 style ordering did not hold; indicates a scanning bug.
    #[error("zero ordering violated: {0}")]
    Ordering(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("race undecided within horizon {horizon} at B = {b}; enlarge the horizon")]
    Undecided { b: f64, horizon: f64 },

    #[error("degenerate zero: {0}")]
    DegenerateZero(String),

    #[error("spec inconsistency: {0}")]
    Inconsistent(String),

    #[error("eigensolver did not converge at index {index}")]
    NoConvergence { index: usize },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),
}

pub type Result<T> = std::result::Result<T, Error>;
