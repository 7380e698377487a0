use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A field was evaluated where it is undefined, or a sample is outside
    /// the chart.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("requested derivative order {requested} exceeds field smoothness {available}")]
    Smoothness { requested: usize, available: usize },

    #[error("no admissible samples produced by the grid")]
    EmptyGrid,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("`{name}` at offset {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable `{name}` at offset {offset} is out of range for dimension {dim}")]
    IndexOutOfRange { name: String, offset: usize, dim: usize },

    #[error("field value {value} is not positive at scale {scale}")]
    NonPositiveValue { value: f64, scale: f64 },

    #[error("degenerate metric tensor (det = {det:e})")]
    DegenerateMetric { det: f64 },

    #[error("function depends on fiber coordinates (|∂/∂y| = {magnitude:e}); expected a basic function")]
    NotBasic { magnitude: f64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}
