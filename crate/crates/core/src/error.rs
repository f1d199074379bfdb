use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("invalid resolution: {0}")]
    Resolution(String),

    #[error("resolution mismatch: {0}")]
    ResolutionMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("wavenumber must be nonzero")]
    ZeroWavenumber,

    #[error("insufficient padding: need grid {required_x}x{required_y} and {required_q} wall-normal nodes, have {have_x}x{have_y} and {have_q}")]
    Padding {
        required_x: usize,
        required_y: usize,
        required_q: usize,
        have_x: usize,
        have_y: usize,
        have_q: usize,
    },

    #[error("matrix not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("eigensolver failure in mode {mode}: {reason}")]
    Eigen { mode: usize, reason: String },

    #[error("linear solve failed in mode {mode}")]
    LinearSolve { mode: usize },

    #[error("right-hand side not orthogonal to kernel of A (violation {violation:.3e}, kernel dimension {kernel_dim})")]
    KernelConsistency { violation: f64, kernel_dim: usize },

    #[error("weak-solution defect: curl of residual {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    WeakSolutionDefect { defect: f64, tolerance: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
