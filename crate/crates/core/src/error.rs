use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("series evaluation is indeterminate: {0}")]
    Indeterminate(String),
    #[error("radius of convergence unresolved: {0}")]
    RadiusUnresolved(String),
    #[error("argument {t} outside the disc of convergence (radius {radius})")]
    OutOfRange { t: f64, radius: f64 },
    #[error("overflow at index {0}")]
    Overflow(usize),
    #[error("no structure of size {0}")]
    EmptyClass(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("sampler budget exhausted after {0} attempts")]
    Budget(u64),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
