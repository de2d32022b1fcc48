use thiserror::Error;

/// Errors raised by state construction, classification and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value with log-magnitude {logmag} does not fit in an f64")]
    Overflow { logmag: f64 },

    #[error("division by exact zero")]
    DivisionByZero,

    #[error("square root of a negative value")]
    NegativeSqrt,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tabulated nonlinearity has {len} entries, index {index} requested")]
    TableIndexOutOfRange { index: usize, len: usize },

    #[error("nonlinearity has a pole at l = {index}")]
    Pole { index: usize },

    #[error("nonlinearity vanishes at l = {index}; the eigenvalue equation has no solution")]
    SingularNonlinearity { index: usize },

    #[error("state does not exist: {diagnostic}")]
    NonexistentState { diagnostic: String },

    #[error("convergence undecided after {terms_examined} terms: {diagnostic}")]
    Indeterminate { terms_examined: usize, diagnostic: String },

    #[error("power series diverges at |z| = {z_abs}")]
    Divergent { z_abs: f64 },

    #[error("series did not reach the requested tolerance within {terms} terms")]
    TruncationFailure { terms: usize },

    #[error("mean occupation is zero; the Mandel parameter is undefined")]
    ZeroMeanOccupation,

    #[error("specs are not comparable: {0}")]
    DomainMismatch(String),

    #[error("no diverging |xi| found below the ceiling {ceiling}")]
    BracketFailure { ceiling: f64 },

    #[error("critical |xi| unresolved inside [{lo}, {hi}]")]
    Unresolved { lo: f64, hi: f64 },

    #[error("near-null space is degenerate (sigma_min = {sigma_min:e}, next = {sigma_next:e})")]
    DegenerateNullspace { sigma_min: f64, sigma_next: f64 },

    #[error("invalid laser configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
