//! Annealing refinement around a classical incumbent.
//!
//! The greedy routing is the starting incumbent. One annealing restart starts
//! from its bit image, the others from random states. Every returned sample
//! is decoded with vehicle repair; samples whose route bits trace one
//! catalogued path per commodity become candidates, and each candidate (the
//! incumbent included) is improved by single-commodity re-routing.

use std::time::{Duration, Instant};

use super::anneal::{AnnealSchedule, Sampler};
use super::greedy::greedy_routing;
use super::routing::{polish, routing_cost};
use super::{finish, SolveError, SolveResult, SolveStatus};
use crate::encode::{decode, Qubo};
use crate::model::{MipModel, Routing};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridOptions {
    /// Re-route commodities one at a time after decoding.
    pub polish: bool,
}

impl Default for HybridOptions {
    fn default() -> Self {
        HybridOptions { polish: true }
    }
}

pub fn hybrid_solve(
    m: &MipModel,
    q: &Qubo,
    sched: &AnnealSchedule,
    time_limit: Duration,
) -> Result<SolveResult, SolveError> {
    hybrid_solve_with(m, q, sched, time_limit, HybridOptions::default())
}

pub fn hybrid_solve_with(
    m: &MipModel,
    q: &Qubo,
    sched: &AnnealSchedule,
    time_limit: Duration,
    opts: HybridOptions,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let deadline = start.checked_add(time_limit);
    let in_time = || deadline.is_none_or(|d| Instant::now() < d);

    let greedy = greedy_routing(m)?;
    if time_limit.is_zero() {
        return Ok(finish(m, m.routing_assignment(&greedy), None, SolveStatus::Heuristic, "hybrid", start));
    }
    let greedy_bits = q.bits_for(&m.routing_assignment(&greedy));

    let mut best = (routing_cost(m, &greedy), greedy.clone());
    let mut consider = |mut r: Routing| {
        if opts.polish {
            polish(m, &mut r, in_time);
        }
        let cost = routing_cost(m, &r);
        if cost < best.0 - 1e-9 * best.0.abs().max(1.0) {
            best = (cost, r);
        }
    };
    consider(greedy);

    let mut truncated = false;
    if q.size > 0 {
        let sampler = Sampler::new(q);
        for restart in 0..sched.restarts {
            if !in_time() {
                truncated = true;
                break;
            }
            let init = (restart == 0).then_some(greedy_bits.as_slice());
            let out = sampler.run(sched, restart, init, deadline);
            truncated |= !out.completed;
            for bits in [&out.final_bits, &out.best_bits] {
                let a = decode(q, bits, true)?;
                if let Some(r) = m.routing_of(&a.x) {
                    consider(r);
                }
            }
        }
    }

    let status = if truncated { SolveStatus::TimeLimitExceeded } else { SolveStatus::Heuristic };
    Ok(finish(m, m.routing_assignment(&best.1), None, status, "hybrid", start))
}
