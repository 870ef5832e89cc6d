use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rate matrix must be square and non-empty (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("negative off-diagonal rate {value} at ({row}, {col})")]
    NegativeRate { row: usize, col: usize, value: f64 },

    #[error("row {row}: diagonal {diagonal} does not match negative off-diagonal sum {expected}")]
    RowSumViolation {
        row: usize,
        diagonal: f64,
        expected: f64,
    },

    #[error("non-finite rate at ({row}, {col})")]
    NonFiniteRate { row: usize, col: usize },

    #[error("generator is reducible: state {to} is unreachable from state {from}")]
    Reducible { from: usize, to: usize },

    #[error("singular linear system in {0}")]
    SingularSystem(&'static str),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid scaling: {0}")]
    InvalidScaling(String),

    #[error("invalid horizon {0}; must be finite and positive")]
    InvalidHorizon(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("event count exceeded cap of {cap} before reaching t = {horizon}")]
    EventOverflow { cap: u64, horizon: f64 },

    #[error("path does not match model/scaling: {0}")]
    SpecMismatch(String),

    #[error("insufficient paths: need at least {needed}, got {got}")]
    InsufficientPaths { needed: usize, got: usize },

    #[error("alpha must be positive, got {0}")]
    NonpositiveAlpha(f64),

    #[error("mean-reversion rate b must be positive, got {0}")]
    NonpositiveB(f64),

    #[error("ODE step refinement exhausted after {halvings} halvings (last change {change:e})")]
    OdeStepFailure { halvings: u32, change: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
