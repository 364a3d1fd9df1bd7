//! Solvers for the routing model: a Metropolis annealer over the QUBO, a
//! direct-first greedy constructor, the hybrid driver combining both, and a
//! branch-and-bound oracle over enumerated paths.

mod anneal;
mod exact;
mod greedy;
mod hybrid;
mod routing;

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use anneal::{simulated_anneal, AnnealSchedule, Sample, SampleSet, DEFAULT_SWEEPS};
pub use exact::{commodity_order, exact_solve, exact_solve_model, partial_bound, ExactOptions};
pub use greedy::{greedy_construct, greedy_routing, greedy_solve};
pub use hybrid::{hybrid_solve, hybrid_solve_with, HybridOptions};
pub use routing::routing_cost;

use crate::encode::{decode, EncodeError, Qubo};
use crate::model::{check_feasibility, mip_gap, objective_value, Assignment, MipModel, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Search tree exhausted; the bound equals the objective.
    Optimal,
    /// No optimality certificate.
    Heuristic,
    NodeLimitExceeded,
    TimeLimitExceeded,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Heuristic => "heuristic",
            SolveStatus::NodeLimitExceeded => "node_limit_exceeded",
            SolveStatus::TimeLimitExceeded => "time_limit_exceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub assignment: Assignment,
    pub objective: f64,
    pub feasible: bool,
    /// Certified lower bound; 0 for heuristics.
    pub bound: f64,
    pub gap: f64,
    /// Seconds.
    pub wall_time: f64,
    pub solver_name: String,
    pub status: SolveStatus,
}

impl SolveResult {
    pub fn to_json(&self, m: &MipModel) -> serde_json::Value {
        serde_json::json!({
            "solver": self.solver_name,
            "status": self.status,
            "objective": self.objective,
            "feasible": self.feasible,
            "bound": self.bound,
            "gap": self.gap,
            "wall_time_s": self.wall_time,
            "assignment": m.assignment_to_json(&self.assignment),
        })
    }
}

pub(crate) fn finish(
    m: &MipModel,
    assignment: Assignment,
    bound: Option<f64>,
    status: SolveStatus,
    name: &str,
    start: Instant,
) -> SolveResult {
    let objective = objective_value(m, &assignment).expect("solver output matches the model");
    let feasible = check_feasibility(m, &assignment).expect("solver output matches the model").feasible;
    let bound = if status == SolveStatus::Optimal { objective } else { bound.unwrap_or(0.0).min(objective) };
    let gap = mip_gap(objective, bound).expect("bound clamped below objective");
    SolveResult {
        assignment,
        objective,
        feasible,
        bound,
        gap,
        wall_time: start.elapsed().as_secs_f64(),
        solver_name: name.to_string(),
        status,
    }
}

/// Plain annealing: the lowest-energy sample, decoded as is or with vehicle
/// repair.
pub fn anneal_solve(m: &MipModel, q: &Qubo, sched: &AnnealSchedule, repair: bool) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let set = simulated_anneal(q, sched);
    let a = if q.size == 0 { m.zero_assignment() } else { decode(q, &set.best_sample().bits, repair)? };
    Ok(finish(m, a, None, SolveStatus::Heuristic, "anneal", start))
}
