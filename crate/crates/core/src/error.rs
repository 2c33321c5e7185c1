use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("direction is not a unit vector (|n| = {norm})")]
    NotUnitVector { norm: f64 },

    #[error("non-finite angle (theta = {theta}, phi = {phi})")]
    NonFiniteAngle { theta: f64, phi: f64 },

    #[error("spin mismatch: 2s = {left} vs 2s = {right}")]
    SpinMismatch { left: u32, right: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |A - A^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("constellation for 2s = {twice_s} needs {expected} points, found {found}")]
    WrongPointCount {
        twice_s: u32,
        expected: usize,
        found: usize,
    },

    #[error("frame is singular (lambda_min / lambda_max = {ratio:e}, tau = {tau:e})")]
    SingularFrame { ratio: f64, tau: f64 },

    #[error("constellation hash mismatch: symbol belongs to {found}, frame is {expected}")]
    HashMismatch { expected: String, found: String },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("imaginary residue {residue:e} in expectation value {value}")]
    ImaginaryResidue { residue: f64, value: f64 },

    #[error(
        "no non-singular candidate for point {index} within radius {radius:e} after {attempts} attempts; \
         try a larger epsilon"
    )]
    BudgetExhausted {
        index: usize,
        attempts: usize,
        radius: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
