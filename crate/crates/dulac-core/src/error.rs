//! Error type shared by the whole pipeline.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("seed inconsistent at order {order}")]
    SeedInconsistent { order: u32 },

    #[error("resonant order {0}: L(k) vanishes")]
    ResonantOrder(u32),

    #[error("not a formal solution at order {0}")]
    NotFormalSolution(u32),

    #[error("no Dulac solution extending seed at order {0}")]
    NoSolution(u32),

    #[error("resonance at order {0}, parameter required")]
    ParameterRequired(u32),

    #[error("degree budget exceeded at order {0}")]
    DegreeBudget(u32),

    #[error("root finding failed: {0}")]
    Roots(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
