use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate zero set on edge {edge}: {detail}")]
    DegenerateZeroSet { edge: String, detail: String },

    #[error("tolerance failure: {0}")]
    ToleranceFailure(String),

    #[error("internal consistency fault: {0}")]
    InternalFault(String),

    #[error("exact arithmetic required but input contains floating-point values: {0}")]
    ExactnessViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
