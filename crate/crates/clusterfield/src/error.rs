use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: no points")]
    EmptyInput,

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },

    #[error("oracle scale exceeded: {0}")]
    OracleScaleExceeded(String),

    #[error("argument {arg} out of domain: {msg}")]
    Domain { arg: &'static str, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate correlation: rho >= 1")]
    DegenerateCorrelation,

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("transport failure at node {node}: {msg}")]
    Transport { node: u32, msg: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
