use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("constant term must be 1 (got {0})")]
    ConstantTermNotOne(num_complex::Complex64),

    #[error("constant term is zero")]
    ZeroConstantTerm,

    #[error("series is not divisible by {factor}: residual {residual:.3e} exceeds {tol:.1e}")]
    NotDivisible {
        factor: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix has eigenvalue {0:.3e} below the clamp threshold")]
    NegativeEigenvalue(f64),

    #[error("operator norm {0} exceeds 1 + 1e-9; not a contraction")]
    NotContraction(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("point {0} is not inside the unit disk")]
    OutsideDisk(num_complex::Complex64),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("working order too small: tail estimate {0:.3e} above 1e-6")]
    HeadroomTooSmall(f64),

    #[error("growth policy failed: {0}")]
    GrowthPolicy(String),

    #[error("truncation insufficient: {0}")]
    InsufficientTruncation(String),

    #[error("integer overflow while building {0}")]
    Overflow(&'static str),

    #[error("map is not normalized: {0}")]
    NotNormalized(String),

    #[error("series order {have} too small, need at least {need}")]
    InsufficientOrder { have: usize, need: usize },

    #[error("malformed symbol: {0}")]
    MalformedSymbol(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}
