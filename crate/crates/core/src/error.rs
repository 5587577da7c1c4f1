use thiserror::Error;

/// Errors raised by the optimizer library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value at component {index}")]
    NonFinite { index: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid configuration: {field}: {message}")]
    Config { field: &'static str, message: String },

    #[error("unknown objective '{0}'")]
    UnknownObjective(String),

    #[error("singular interpolation matrix: rows {first} and {second} are (near-)duplicates")]
    DuplicateSamples { first: usize, second: usize },

    #[error("singular interpolation matrix")]
    SingularSystem,

    #[error("member {index} has no fitness")]
    Unevaluated { index: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("not enough samples: need at least {needed}, have {have}")]
    NotEnoughSamples { needed: usize, have: usize },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("polytope is empty")]
    Infeasible,

    #[error("hit-and-run start point is not strictly feasible")]
    InfeasibleStart,

    #[error("degenerate polytope: no chord of positive length found")]
    DegeneratePolytope,

    #[error("gain undefined for run {run}: best fitness is zero (initial {initial}, generation {k}: {at_k})")]
    ZeroDenominator { run: usize, initial: f64, k: usize, at_k: f64 },

    #[error("records disagree on length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        Error::Config { field, message: message.into() }
    }
}
