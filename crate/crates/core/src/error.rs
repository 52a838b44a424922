use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("insufficient rank: need {required} independent rows, pool spans {available}")]
    InsufficientRank { available: usize, required: usize },

    #[error("cannot form {requested} distinct bases from the check pool")]
    PoolTooSmall { requested: usize },

    #[error("code construction failed: {0}")]
    ConstructionFailure(String),

    #[error("shift {shift} out of range for lifting size {z}")]
    ShiftOutOfRange { shift: i64, z: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("alist parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("alist degree lists disagree: {0}")]
    InconsistentDegrees(String),

    #[error("invalid code rate {0}; must lie in (0, 1]")]
    InvalidRate(f64),

    #[error("invalid noise standard deviation {0}; must be positive")]
    InvalidSigma(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid shift {shift} for group of order {order}")]
    InvalidShift { shift: usize, order: usize },

    #[error("length {0} is even; doubling is not a permutation")]
    EvenLength(usize),

    #[error("candidate list is empty")]
    EmptyList,

    #[error("permutation {index} is not an automorphism of the code")]
    NotAnAutomorphism { index: usize },

    #[error("ensemble size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("code dimension {k} too large for exhaustive decoding (limit {limit})")]
    DimensionTooLarge { k: usize, limit: usize },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
