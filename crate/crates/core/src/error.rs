use thiserror::Error;

/// Errors raised by validation and by the compression methods.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompressError {
    #[error("input contains a non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("input is empty ({rows}x{cols})")]
    EmptyInput { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sequence of length {0} is too short to split")]
    TooShort(usize),

    #[error("only {available} sources have an in-window candidate, {requested} requested")]
    InsufficientMergeable { requested: usize, available: usize },

    #[error("cannot reach target length {target}: stuck at {current} tokens")]
    CannotReachTarget { current: usize, target: usize },

    #[error("UnavailableRatio: keep ratio {keep_ratio} gives pooling factor {factor} (needs >= 2)")]
    UnavailableRatio { keep_ratio: f64, factor: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sequence does not match the synthetic spec: {0}")]
    SpecMismatch(String),

    #[error("oracle input of length {len} exceeds the limit of {limit}")]
    OracleTooLarge { len: usize, limit: usize },
}

impl CompressError {
    /// True for the two errors that mean "this budget cannot be realised"
    /// rather than "the input or configuration is malformed".
    pub fn is_budget_error(&self) -> bool {
        matches!(
            self,
            CompressError::UnavailableRatio { .. } | CompressError::CannotReachTarget { .. }
        )
    }
}
