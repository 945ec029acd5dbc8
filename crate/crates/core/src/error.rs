use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Hull construction met affinely dependent or near-coplanar points.
    /// Callers drawing random inputs resample the replication.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("the origin is not interior to the polytope (facet offset {offset})")]
    OriginOutside { offset: f64 },

    #[error("parameter {value} outside the admissible range (0, {max}]")]
    OutOfRange { value: f64, max: f64 },

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("frame rejection efficiency {efficiency:e} is below 1e-6")]
    TooSmallCone { efficiency: f64 },

    #[error("non-positive value {value} at row {row}")]
    NonPositive { row: usize, value: f64 },

    #[error("need at least {needed} rows, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error reflects bad user input rather than a numeric failure.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidInput(_) | Error::Json(_))
    }
}
