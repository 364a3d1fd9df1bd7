//! Multicommodity network flow routing for line-haul logistics networks.
//!
//! The pipeline runs [`instance`] → [`preprocess`] → [`model`] → [`encode`]
//! → [`solve`], with [`harness`] generating synthetic instances and
//! benchmarking solvers against each other.

pub mod encode;
pub mod harness;
pub mod instance;
pub mod model;
pub mod preprocess;
pub mod solve;

#[cfg(test)]
pub(crate) mod fixtures;

pub use instance::{load_instance, validate_instance, Instance};
pub use model::{build_mip, Assignment, MipModel};
pub use preprocess::{build_restriction_matrix, restrict, PreprocessedInstance, RestrictionPolicy};
