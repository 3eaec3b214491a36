use alloc::string::String;

/// Errors raised by the rearrangement kernels, samplers and metrics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("lattice mismatch between operands")]
    LatticeMismatch,
    #[error("grid values must be finite and nonnegative (cell {cell}: {value})")]
    InvalidValue { cell: usize, value: f64 },
    #[error("vector has zero or non-finite norm")]
    DegenerateVector,
    #[error("radius must be finite and nonnegative, got {0}")]
    InvalidRadius(f64),
    #[error("reflection does not map the lattice onto itself")]
    NotLatticeCompatible,
    #[error("great circle through antipodal points is not unique")]
    AntipodalInput,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix determinant {0} is not 1")]
    NotUnitDeterminant(f64),
    #[error("function already equals its symmetric decreasing rearrangement")]
    AlreadySymmetric,
    #[error("no lattice radius satisfies the modulus-of-continuity condition")]
    NoValidRho,
    #[error("rejection sampler exceeded its budget of {0} proposals")]
    RejectionBudgetExceeded(u64),
    #[error("unsupported sampler: {0}")]
    UnsupportedSpec(&'static str),
    #[error("invalid sampler spec: {0}")]
    InvalidSpec(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("set is empty")]
    EmptySet,
    #[error("parallel set is empty")]
    EmptyParallelSet,
}

pub type Result<T> = core::result::Result<T, Error>;
