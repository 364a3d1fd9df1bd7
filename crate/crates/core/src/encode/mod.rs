//! Penalty encoding of the routing model as a QUBO, its Ising form, and the
//! inverse decoding of bit vectors.

mod expand;
mod format;
mod ising;
mod qubo;

use thiserror::Error;

pub use expand::{binary_expand, BitGroup};
pub use format::{read_qubo, varmap_json, write_qubo, QuboFile};
pub use ising::{ising_energy, qubo_to_ising, Ising};
pub use qubo::{
    decode, default_slack_unit, encode_qubo, qubo_energy, EncodeWarning, PenaltyConfig, Qubo, QuboVar, MAX_SLACK_BITS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("bit vector has length {got}, model has {expected} variables")]
    SizeMismatch { expected: usize, got: usize },
    #[error("{name} must be positive and finite, got {value}")]
    InvalidPenalty { name: &'static str, value: f64 },
    #[error("qubo file line {line}: {message}")]
    Format { line: usize, message: String },
}
