use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("precision error: achieved bound {achieved:e} exceeds requested {requested:e}")]
    Precision { achieved: f64, requested: f64 },
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("sampler budget exhausted after {attempts} attempts ({detail})")]
    Exhausted { attempts: u64, detail: String },
    #[error("consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
