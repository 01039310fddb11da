use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("row and column index sets differ in size ({rows} vs {cols})")]
    UnequalIndexSets { rows: usize, cols: usize },

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("negative exponent at byte {pos}")]
    NegativeExponent { pos: usize },

    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),

    #[error("unknown construction `{0}`")]
    UnknownConstruction(String),

    #[error("out of regime: H = {h}, r = {r} (both must be at least 1)")]
    OutOfRegime { h: u64, r: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
