use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a non-finite entry at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive definite (lambda_min {lambda_min:.3e}, lambda_max {lambda_max:.3e})")]
    NotPositiveDefinite { lambda_min: f64, lambda_max: f64 },
    #[error("space is reducible: kernels {} and {} are orthogonal or parallel", .i + 1, .j + 1)]
    Reducible { i: usize, j: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("indices must be distinct")]
    RepeatedIndex,
    #[error("rescaling factor {index} is zero or non-finite")]
    ZeroRescaling { index: usize },
    #[error("tolerance {name} = {value} outside (0, 1e-2)")]
    BadTolerance { name: &'static str, value: f64 },
    #[error("point {index} is not in the open unit ball (norm {norm})")]
    OutOfBall { index: usize, norm: f64 },
    #[error("point sets have different sizes ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("points {} and {} coincide", .i + 1, .j + 1)]
    DegenerateTriple { i: usize, j: usize },
    #[error("kernel product too small to define an argument")]
    DegenerateArg,
    #[error("linear system is singular (pivot {pivot:.3e})")]
    SingularSystem { pivot: f64 },
    #[error("matrix is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },
    #[error("space lacks the complete Pick property: {certificate}")]
    NotCpp { certificate: CppViolation },
    #[error("data are infeasible: {reason}")]
    Infeasible { reason: String },
    #[error("hypothesis failed: {reason}")]
    HypothesisFailed { reason: String },
    #[error("operation requires n = {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("power kernels require a tree-generated space")]
    NotTreeKernel,
    #[error("edge weight at vertex {vertex} is not positive")]
    ZeroEdgeWeight { vertex: usize },
    #[error("invalid tree: {reason}")]
    InvalidTree { reason: String },
    #[error("internal inconsistency: {reason}")]
    InternalInconsistency { reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Evidence that a space lacks the complete Pick property.
#[derive(Debug, Clone, PartialEq)]
pub enum CppViolation {
    /// A matrix `MQ_r` has a negative eigenvalue (0-based `r`).
    Eigenvalue { r: usize, lambda_min: f64 },
    /// The squared height of point `index` came out negative.
    Height { index: usize, radicand: f64 },
    /// Point `index` lies in the span of earlier points but its inner
    /// products disagree with that position.
    Inconsistent { index: usize, residual: f64 },
}

impl std::fmt::Display for CppViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CppViolation::Eigenvalue { r, lambda_min } => {
                write!(f, "MQ_{} has eigenvalue {:.3e}", r + 1, lambda_min)
            }
            CppViolation::Height { index, radicand } => {
                write!(f, "squared height of point {} is {:.3e}", index + 1, radicand)
            }
            CppViolation::Inconsistent { index, residual } => {
                write!(f, "point {} is inconsistent with its span (residual {:.3e})", index + 1, residual)
            }
        }
    }
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotCpp { .. } | Error::Infeasible { .. } => 2,
            Error::InternalInconsistency { .. }
            | Error::IllConditioned { .. }
            | Error::SingularSystem { .. } => 3,
            _ => 1,
        }
    }
}
