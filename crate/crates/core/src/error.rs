use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {name} = {value} out of range: {bound}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("survival argument must be non-negative, got {0}")]
    NegativeArgument(f64),

    #[error("cluster survival is undefined for empty clusters")]
    EmptyCluster,

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("schedule uses {used} posts but the budget is {budget}")]
    Infeasible { used: u64, budget: u64 },

    #[error("enumeration of {size} schedules exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("heuristic {0} requires per-slot activity weights")]
    MissingActivity(&'static str),

    #[error("slot count {0} does not divide 86400 seconds")]
    BadSlotCount(usize),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("unknown user {0:?}")]
    UnknownUser(String),

    #[error("cluster size {0} has no observations")]
    EmptyBucket(usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
