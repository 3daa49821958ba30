use alloc::string::String;

/// Errors raised by the augmentation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid range: lo {lo} > hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("invalid probability {0}: must lie in [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid ratio {0}: must lie in [0, 1]")]
    InvalidRatio(f64),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("label row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("invalid shape: {0}")]
    InvalidShape(&'static str),
    #[error("crop size {size} does not fit a {height}x{width} image")]
    CropTooLarge { size: usize, height: usize, width: usize },
    #[error("vote vector has no votes")]
    NoVotes,
    #[error("vote vector has length {0}, expected 10")]
    VoteLength(usize),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("operator expects method {expected}, policy selects {found}")]
    MethodMismatch {
        expected: &'static str,
        found: &'static str,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
