use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("polytope is empty")]
    Empty,

    #[error("origin is not in the interior of the polytope")]
    OriginNotInterior,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector where a direction is required")]
    ZeroVector,

    #[error("vector is not unit length (squared norm {0})")]
    NotUnit(f64),

    #[error("frame is not orthonormal: {0}")]
    NotOrthonormal(String),

    #[error("invalid pseudo frame: {0}")]
    InvalidPseudoFrame(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("operation requires dimension {0}")]
    UnsupportedDimension(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(
        "projected evaluation count {projected} exceeds budget {budget}{}",
        match min_tau { Some(t) => format!("; smallest feasible tau is {t}"), None => String::new() }
    )]
    BudgetExceeded {
        projected: f64,
        budget: f64,
        min_tau: Option<String>,
    },

    #[error("too expensive: {0}")]
    TooExpensive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
