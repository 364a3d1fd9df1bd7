//! Depth-first branch and bound over per-commodity path choices.
//!
//! Commodities are fixed one at a time, heaviest first. Children are tried in
//! order of the extra vehicle cost they add. A node's lower bound prices
//! fractional vehicles: committed loads at `d * CV * load / W`, plus every
//! unfixed commodity on its cheapest path at `d * CV * L_k / W`.

use std::time::{Duration, Instant};

use super::routing::LoadState;
use super::{finish, SolveError, SolveResult, SolveStatus};
use crate::instance::Instance;
use crate::model::{build_mip, MipModel, Routing};
use crate::preprocess::PreprocessedInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Search nodes after which the search stops once an incumbent exists.
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { node_limit: 10_000_000, time_limit: None }
    }
}

pub fn exact_solve(inst: &Instance, pre: &PreprocessedInstance, node_limit: u64) -> Result<SolveResult, SolveError> {
    let m = build_mip(inst, pre)?;
    Ok(exact_solve_model(&m, ExactOptions { node_limit, time_limit: None }))
}

pub fn exact_solve_model(m: &MipModel, opts: ExactOptions) -> SolveResult {
    let start = Instant::now();
    let mut search = Search::new(m, opts, start);
    search.dive(0);
    let (routing, cost) = search.incumbent.take().expect("first dive always reaches a leaf");
    let (bound, status) = match search.stopped {
        Some(s) if search.open_bound < cost => (search.open_bound, s),
        _ => (cost, SolveStatus::Optimal),
    };
    finish(m, m.routing_assignment(&routing), Some(bound), status, "exact", start)
}

/// Lower-bound evaluation exposed for checking admissibility: the bound of
/// the node where the first `fixed.len()` commodities of [`commodity_order`]
/// take the given paths.
pub fn partial_bound(m: &MipModel, fixed: &[usize]) -> f64 {
    let mut search = Search::new(m, ExactOptions::default(), Instant::now());
    for (d, &p) in fixed.iter().enumerate() {
        search.apply(d, p);
    }
    search.bound(fixed.len())
}

/// Commodity indices (into `MipModel::commodities`) in branching order.
pub fn commodity_order(m: &MipModel) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m.commodities.len()).collect();
    order.sort_by(|&a, &b| m.commodities[b].load.total_cmp(&m.commodities[a].load).then(a.cmp(&b)));
    order
}

struct Search<'m> {
    m: &'m MipModel,
    opts: ExactOptions,
    start: Instant,
    order: Vec<usize>,
    /// Sum of cheapest fractional path costs of `order[d..]`.
    suffix: Vec<f64>,
    state: LoadState<'m>,
    frac_cost: f64,
    ceil_cost: f64,
    choice: Vec<usize>,
    incumbent: Option<(Routing, f64)>,
    nodes: u64,
    stopped: Option<SolveStatus>,
    open_bound: f64,
}

impl<'m> Search<'m> {
    fn new(m: &'m MipModel, opts: ExactOptions, start: Instant) -> Self {
        let order = commodity_order(m);
        let w = m.vehicle_capacity;
        let cheapest: Vec<f64> = order
            .iter()
            .map(|&c| {
                let com = &m.commodities[c];
                com.paths
                    .iter()
                    .map(|p| p.n.iter().map(|&a| m.objective[a]).sum::<f64>() * com.load / w)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let mut suffix = vec![0.0; order.len() + 1];
        for d in (0..order.len()).rev() {
            suffix[d] = suffix[d + 1] + cheapest[d];
        }
        Search {
            m,
            opts,
            start,
            choice: vec![0; m.commodities.len()],
            order,
            suffix,
            state: LoadState::empty(m),
            frac_cost: 0.0,
            ceil_cost: 0.0,
            incumbent: None,
            nodes: 0,
            stopped: None,
            open_bound: f64::INFINITY,
        }
    }

    fn bound(&self, depth: usize) -> f64 {
        self.frac_cost + self.suffix[depth]
    }

    fn frac_delta(&self, c: usize, p: usize) -> f64 {
        let com = &self.m.commodities[c];
        com.paths[p].n.iter().map(|&a| self.m.objective[a]).sum::<f64>() * com.load / self.m.vehicle_capacity
    }

    fn apply(&mut self, depth: usize, p: usize) {
        let c = self.order[depth];
        self.ceil_cost += self.state.marginal(c, p);
        self.frac_cost += self.frac_delta(c, p);
        self.state.add(c, p, 1.0);
        self.choice[c] = p;
    }

    fn out_of_budget(&self) -> Option<SolveStatus> {
        if self.nodes >= self.opts.node_limit {
            return Some(SolveStatus::NodeLimitExceeded);
        }
        match self.opts.time_limit {
            Some(t) if self.start.elapsed() >= t => Some(SolveStatus::TimeLimitExceeded),
            _ => None,
        }
    }

    fn prunes(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some((_, best)) => bound >= best - 1e-9 * best.abs().max(1.0),
            None => false,
        }
    }

    fn dive(&mut self, depth: usize) {
        self.nodes += 1;
        if depth == self.order.len() {
            if !self.prunes(self.ceil_cost) {
                self.incumbent = Some((Routing(self.choice.clone()), self.ceil_cost));
            }
            return;
        }
        let c = self.order[depth];
        let mut children: Vec<(f64, f64, usize)> = (0..self.m.commodities[c].paths.len())
            .map(|p| {
                let ceil = self.ceil_cost + self.state.marginal(c, p);
                let frac = self.frac_cost + self.frac_delta(c, p);
                let bound = frac + self.suffix[depth + 1];
                (ceil - self.ceil_cost, bound, p)
            })
            .collect();
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));

        for (_, bound, p) in children {
            if self.stopped.is_none() && self.incumbent.is_some() {
                self.stopped = self.out_of_budget();
            }
            if self.stopped.is_some() {
                if !self.prunes(bound) {
                    self.open_bound = self.open_bound.min(bound);
                }
                continue;
            }
            if self.prunes(bound) {
                continue;
            }
            let saved_loads: Vec<f64> = self.m.commodities[c].paths[p].n.iter().map(|&a| self.state.loads[a]).collect();
            let saved = (self.frac_cost, self.ceil_cost);
            self.apply(depth, p);
            self.dive(depth + 1);
            for (&a, l) in self.m.commodities[c].paths[p].n.iter().zip(saved_loads) {
                self.state.loads[a] = l;
            }
            (self.frac_cost, self.ceil_cost) = saved;
        }
    }
}
