use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left:?}, right is {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("environment error: {0}")]
    Env(String),

    #[error("non-finite weight at step {step}, layer {layer}")]
    NonFinite { step: u64, layer: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
