use std::time::Instant;

use super::{finish, SolveError, SolveResult, SolveStatus};
use crate::instance::Instance;
use crate::model::{build_mip, Assignment, MipModel, Routing};
use crate::preprocess::PreprocessedInstance;

/// Direct-first routing: every commodity independently takes its surviving
/// path with the fewest arcs (ties to the shorter, then the earlier path).
pub fn greedy_routing(m: &MipModel) -> Result<Routing, SolveError> {
    m.commodities
        .iter()
        .map(|c| {
            c.paths
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.nodes.len().cmp(&b.nodes.len()).then(a.length_km.total_cmp(&b.length_km)))
                .map(|(i, _)| i)
                .ok_or_else(|| SolveError::Model(crate::model::ModelError::InfeasibleCommodity(c.name.clone())))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Routing)
}

/// Greedy assignment with the fewest vehicles that carry each arc's load.
pub fn greedy_construct(inst: &Instance, pre: &PreprocessedInstance) -> Result<Assignment, SolveError> {
    let m = build_mip(inst, pre)?;
    Ok(m.routing_assignment(&greedy_routing(&m)?))
}

pub fn greedy_solve(m: &MipModel) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let routing = greedy_routing(m)?;
    Ok(finish(m, m.routing_assignment(&routing), None, SolveStatus::Heuristic, "greedy", start))
}
