use thiserror::Error;

/// Errors shared by all exact-arithmetic modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operation on zero input")]
    ZeroInput,
    #[error("effective precision dropped below {min} digits (had {have})")]
    PrecisionExhausted { min: usize, have: usize },
    #[error("{0} is not prime")]
    InvalidPrime(u64),
    #[error("operation requires an odd prime")]
    OddPrimeRequired,
    #[error("scalars belong to different primes: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("elements belong to different extensions")]
    ExtensionMismatch,
    #[error("no canonical-parameter row matches the class (internal inconsistency)")]
    RowNotFound,
    #[error("matrix dimension {0} not supported here")]
    BadDimension(usize),
    #[error("dimension must be even, got {0}")]
    OddDimension(usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("linear system unexpectedly singular (internal inconsistency)")]
    SingularSystem,
    #[error("parameters outside the variant's domain: {0}")]
    ParameterDomain(String),
    #[error("coefficient functions have a pole at b^2 = c")]
    PoleAtBSquaredEqualsC,
    #[error("witness construction is out of scope for this variant")]
    WitnessOutOfScope,
    #[error("norm equation unsolvable (classification inconsistency)")]
    NormUnsolvable,
    #[error("input is degenerate; use the degenerate-model catalogue")]
    DegenerateInput,
    #[error("eigenvalue clusters closer than 10*tol; result unreliable")]
    IllConditioned,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ArithError>;
