//! Synthetic instances, solver matchups and reports, plus the command line.

mod bench;
pub mod cli;
mod generate;
mod report;

use thiserror::Error;

pub use bench::{run_benchmark, run_solver, BenchRecord, BenchSuite, SolverConfig, SolverKind, SuiteEntry};
pub use generate::{
    fastest_time, generate_instance, generated_stats, sized_config, GeneratorConfig, AREA_KM, SIZING_OUT_DEGREE,
};
pub use report::{emit_report, emit_report_with, format_objective, ReportFormat, ReportOptions, CSV_HEADER};

use crate::encode::EncodeError;
use crate::model::ModelError;
use crate::preprocess::PreprocessError;
use crate::solve::SolveError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("invalid benchmark: {0}")]
    InvalidSuite(String),
    #[error("no generator configuration reaches {target} variables")]
    Sizing { target: usize },
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
