//! Random tiny networks and independent reference evaluators shared by the
//! property tests and the acceptance run.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use mcnf::encode::{Qubo, QuboVar};
use mcnf::harness::fastest_time;
use mcnf::instance::{Arc, Commodity, Instance, NodeId};
use mcnf::preprocess::{Path, PreprocessedInstance, RestrictionMatrix};
use mcnf::MipModel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const T2_JSON: &str = include_str!("../data/t2.json");
pub const T1_JSON: &str = include_str!("../data/t1.json");

#[derive(Debug, Clone, Copy)]
pub struct TinyParams {
    pub max_nodes: usize,
    pub max_commodities: usize,
    pub arc_probability: f64,
    /// Turnaround budget as a multiple of the fastest time, drawn in `[1, tat_slack]`.
    pub tat_slack: f64,
    pub max_hops: usize,
    pub capacities: &'static [f64],
    /// Loads are integers in `1..=max_load`.
    pub max_load: u32,
}

impl TinyParams {
    pub const fn new(max_nodes: usize, max_commodities: usize, max_hops: usize) -> Self {
        TinyParams {
            max_nodes,
            max_commodities,
            arc_probability: 0.6,
            tat_slack: 2.0,
            max_hops,
            capacities: &[4.0, 5.0, 10.0, 15.0],
            max_load: 12,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed network with `2..=max_nodes` nodes and commodities on
/// distinct pairs that are reachable within `max_hops` arcs.
pub fn tiny_instance(seed: u64, params: &TinyParams) -> Instance {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=params.max_nodes.max(2));
    let mut distances = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(params.arc_probability) {
                let tenths: u32 = rng.gen_range(10..=300);
                distances.insert(Arc::new(i, j), tenths as f64 / 10.0);
            }
        }
    }
    let mut inst = Instance {
        nodes: (1..=n).map(|i| format!("n{i}")).collect(),
        distances,
        vehicle_capacity: *params.capacities.choose(&mut rng).unwrap(),
        vehicle_cost_per_km: *[1.0, 1.5, 2.0].choose(&mut rng).unwrap(),
        commodities: Vec::new(),
        speed: 60.0,
        hop_processing_time: 0.5,
    };
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    pairs.shuffle(&mut rng);
    let want = rng.gen_range(1..=params.max_commodities.max(1));
    for (o, d) in pairs {
        if inst.commodities.len() == want {
            break;
        }
        let Some(t) = fastest_time(&inst, NodeId(o), NodeId(d), params.max_hops) else { continue };
        let slack = rng.gen_range(1.0..=params.tat_slack.max(1.0));
        let tat = if slack < 1.05 { t } else { t * slack };
        let load = rng.gen_range(1..=params.max_load) as f64;
        inst.commodities.push(Commodity {
            id: format!("k{}", inst.commodities.len() + 1),
            origin: NodeId(o),
            destination: NodeId(d),
            load,
            tat,
        });
    }
    inst
}

/// Every simple path from `o` to `d` with at most `max_hops` arcs over arcs
/// that exist and are allowed, by plain recursion over node sequences, sorted
/// by length then node sequence.
pub fn brute_force_paths(
    inst: &Instance,
    rm: &RestrictionMatrix,
    o: NodeId,
    d: NodeId,
    max_hops: usize,
) -> Vec<(Vec<NodeId>, f64)> {
    fn rec(
        inst: &Instance,
        rm: &RestrictionMatrix,
        d: NodeId,
        max_hops: usize,
        seq: &mut Vec<NodeId>,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let last = *seq.last().unwrap();
        if last == d {
            out.push(seq.clone());
            return;
        }
        if seq.len() - 1 == max_hops {
            return;
        }
        for v in 0..inst.nodes.len() {
            let v = NodeId(v);
            let arc = Arc { from: last, to: v };
            if seq.contains(&v) || inst.distance(arc).is_none() || !rm.allows(arc) {
                continue;
            }
            seq.push(v);
            rec(inst, rm, d, max_hops, seq, out);
            seq.pop();
        }
    }
    let mut seqs = Vec::new();
    rec(inst, rm, d, max_hops, &mut vec![o], &mut seqs);
    let mut out: Vec<(Vec<NodeId>, f64)> = seqs
        .into_iter()
        .map(|s| {
            let len = s.windows(2).fold(0.0, |acc, w| acc + inst.distance(Arc { from: w[0], to: w[1] }).unwrap());
            (s, len)
        })
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn path_time(inst: &Instance, nodes: &[NodeId], length: f64) -> f64 {
    let intermediate = nodes.len().saturating_sub(2) as f64;
    length / inst.speed + inst.hop_processing_time * intermediate
}

/// Vehicle cost of routing each commodity along `paths[k][choice[k]]`.
pub fn routing_cost(inst: &Instance, paths: &[&Vec<Path>], loads: &[f64], choice: &[usize]) -> f64 {
    let mut flow: HashMap<Arc, f64> = HashMap::new();
    for (k, &c) in choice.iter().enumerate() {
        for w in paths[k][c].nodes.windows(2) {
            *flow.entry(Arc { from: w[0], to: w[1] }).or_default() += loads[k];
        }
    }
    let w = inst.vehicle_capacity;
    let mut arcs: Vec<_> = flow.into_iter().collect();
    arcs.sort_by_key(|(a, _)| *a);
    arcs.iter()
        .map(|(a, l)| {
            let vehicles = (l / w - 1e-9).ceil().max(0.0);
            inst.distance(*a).unwrap() * inst.vehicle_cost_per_km * vehicles
        })
        .sum()
}

/// Minimum routing cost over every combination of surviving paths, counting
/// only commodities with positive load. `None` if some commodity has no path.
pub fn exhaustive_optimum(inst: &Instance, pre: &PreprocessedInstance) -> Option<f64> {
    let kept: Vec<usize> = (0..inst.commodities.len()).filter(|&k| inst.commodities[k].load > 0.0).collect();
    let paths: Vec<&Vec<Path>> = kept.iter().map(|&k| &pre.paths[&mcnf::instance::CommodityId(k)]).collect();
    if paths.iter().any(|p| p.is_empty()) {
        return None;
    }
    let loads: Vec<f64> = kept.iter().map(|&k| inst.commodities[k].load).collect();
    let mut choice = vec![0usize; kept.len()];
    let mut best = f64::INFINITY;
    loop {
        best = best.min(routing_cost(inst, &paths, &loads, &choice));
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Some(if best.is_finite() { best } else { 0.0 });
            }
            choice[i] += 1;
            if choice[i] < paths[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Penalised objective of a bit vector evaluated from the instance and the
/// variable map alone: vehicle cost, squared unit flow residuals at every
/// node, and squared scaled capacity residuals with slack.
pub fn penalised_objective(inst: &Instance, m: &MipModel, q: &Qubo, bits: &[bool]) -> f64 {
    let mut n_val = vec![0u64; m.n_vars.len()];
    let mut s_val = vec![0u64; m.n_vars.len()];
    let mut x_val = vec![false; m.x_vars.len()];
    for (b, v) in q.varmap.iter().enumerate() {
        if !bits[b] {
            continue;
        }
        match *v {
            QuboVar::X { x } => x_val[x] = true,
            QuboVar::NBit { n_var, weight } => n_val[n_var] += weight,
            QuboVar::SlackBit { n_var, weight } => s_val[n_var] += weight,
        }
    }
    let cv = inst.vehicle_cost_per_km;
    let mut cost = 0.0;
    for (i, v) in m.n_vars.iter().enumerate() {
        cost += inst.distance(v.arc).unwrap() * cv * n_val[i] as f64;
    }

    let pf = q.penalties.flow_penalty;
    let mut flow_pen = 0.0;
    for mc in &m.commodities {
        let c = &inst.commodities[mc.id.0];
        for node in 0..inst.nodes.len() {
            let node = NodeId(node);
            let mut net = 0.0;
            for (xi, xv) in m.x_vars.iter().enumerate() {
                if xv.commodity != mc.id || !x_val[xi] {
                    continue;
                }
                if xv.arc.from == node {
                    net += 1.0;
                }
                if xv.arc.to == node {
                    net -= 1.0;
                }
            }
            let supply = if node == c.origin {
                1.0
            } else if node == c.destination {
                -1.0
            } else {
                0.0
            };
            flow_pen += (net - supply) * (net - supply);
        }
    }

    let pc = q.penalties.capacity_penalty;
    let u = q.penalties.slack_unit;
    let w = inst.vehicle_capacity;
    let mut cap_pen = 0.0;
    for (i, v) in m.n_vars.iter().enumerate() {
        let load: f64 = m
            .x_vars
            .iter()
            .enumerate()
            .filter(|(xi, xv)| xv.arc == v.arc && x_val[*xi])
            .map(|(_, xv)| inst.commodities[xv.commodity.0].load)
            .sum();
        let r = load / u - n_val[i] as f64 * w / u + s_val[i] as f64;
        cap_pen += r * r;
    }
    cost + pf * flow_pen + pc * cap_pen
}

/// Calls `f` with every bit vector of length `n` in Gray-code order.
pub fn for_each_bits(n: usize, mut f: impl FnMut(&[bool])) {
    let mut bits = vec![false; n];
    f(&bits);
    for i in 1u64..(1u64 << n) {
        let flip = i.trailing_zeros() as usize;
        bits[flip] = !bits[flip];
        f(&bits);
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
