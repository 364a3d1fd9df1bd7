//! Graph reduction before modelling: a restriction matrix prunes the arc
//! set, simple paths are enumerated per origin-destination pair, paths
//! exceeding the turnaround budget are dropped, and each commodity keeps only
//! the arcs that appear on its surviving paths.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Arc, CommodityId, Instance, NodeId};

pub const DEFAULT_MAX_HOPS: usize = 4;
pub const DEFAULT_PATH_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("commodity `{commodity}` has more than {cap} paths")]
    PathExplosion { commodity: String, cap: usize },
}

/// How allowed successors are chosen for each node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RestrictionPolicy {
    All,
    /// The `m` nearest outgoing neighbours, ties by node order.
    NearestM {
        m: usize,
    },
    /// Outgoing neighbours within `km` (inclusive).
    Radius {
        km: f64,
    },
}

impl std::str::FromStr for RestrictionPolicy {
    type Err = String;

    /// `all`, `nearest:M` or `radius:KM`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("all", None) => Ok(RestrictionPolicy::All),
            ("nearest", Some(m)) => m
                .parse()
                .ok()
                .filter(|&m| m >= 1)
                .map(|m| RestrictionPolicy::NearestM { m })
                .ok_or_else(|| format!("invalid neighbour count `{m}`")),
            ("radius", Some(r)) => r
                .parse()
                .ok()
                .filter(|&r: &f64| r > 0.0)
                .map(|km| RestrictionPolicy::Radius { km })
                .ok_or_else(|| format!("invalid radius `{r}`")),
            _ => Err(format!("unknown policy `{s}` (expected all, nearest:M or radius:KM)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RestrictionMatrix {
    pub allowed: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl RestrictionMatrix {
    pub fn allows(&self, arc: Arc) -> bool {
        self.allowed.get(&arc.from).is_some_and(|s| s.contains(&arc.to))
    }

    pub fn remove(&mut self, arc: Arc) {
        if let Some(s) = self.allowed.get_mut(&arc.from) {
            s.remove(&arc.to);
        }
    }

    pub fn num_arcs(&self) -> usize {
        self.allowed.values().map(BTreeSet::len).sum()
    }
}

pub fn build_restriction_matrix(inst: &Instance, policy: RestrictionPolicy) -> RestrictionMatrix {
    let mut allowed: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    let mut outgoing: BTreeMap<NodeId, Vec<(f64, NodeId)>> = BTreeMap::new();
    for (a, &km) in &inst.distances {
        outgoing.entry(a.from).or_default().push((km, a.to));
    }
    for (from, mut out) in outgoing {
        let keep: BTreeSet<NodeId> = match policy {
            RestrictionPolicy::All => out.iter().map(|&(_, to)| to).collect(),
            RestrictionPolicy::NearestM { m } => {
                out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                out.iter().take(m).map(|&(_, to)| to).collect()
            }
            RestrictionPolicy::Radius { km } => out.iter().filter(|&&(d, _)| d <= km).map(|&(_, to)| to).collect(),
        };
        allowed.insert(from, keep);
    }
    RestrictionMatrix { allowed }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub length_km: f64,
    /// Hours, per the instance travel-time model.
    pub time: f64,
}

impl Path {
    pub fn from_nodes(inst: &Instance, nodes: Vec<NodeId>) -> Option<Path> {
        let mut length_km = 0.0;
        for w in nodes.windows(2) {
            length_km += inst.distance(Arc { from: w[0], to: w[1] })?;
        }
        let time = inst.travel_time(length_km, nodes.len().saturating_sub(1));
        Some(Path { nodes, length_km, time })
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.nodes.windows(2).map(|w| Arc { from: w[0], to: w[1] })
    }

    pub fn num_arcs(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

/// All simple paths of commodity `k` over restricted arcs with at most
/// `max_hops` arcs, shortest first, ties by node sequence.
pub fn enumerate_paths(
    inst: &Instance,
    rm: &RestrictionMatrix,
    k: CommodityId,
    max_hops: usize,
) -> Result<Vec<Path>, PreprocessError> {
    enumerate_paths_capped(inst, rm, k, max_hops, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_capped(
    inst: &Instance,
    rm: &RestrictionMatrix,
    k: CommodityId,
    max_hops: usize,
    cap: usize,
) -> Result<Vec<Path>, PreprocessError> {
    let c = inst.commodity(k);
    let mut search = Dfs {
        inst,
        rm,
        target: c.destination,
        max_hops,
        cap,
        stack: vec![c.origin],
        on_stack: vec![false; inst.nodes.len()],
        length: vec![0.0],
        found: Vec::new(),
    };
    search.on_stack[c.origin.0] = true;
    if search.extend().is_err() {
        return Err(PreprocessError::PathExplosion { commodity: c.id.clone(), cap });
    }
    let mut paths = search.found;
    paths.sort_by(|a, b| a.length_km.total_cmp(&b.length_km).then_with(|| a.nodes.cmp(&b.nodes)));
    Ok(paths)
}

struct Dfs<'a> {
    inst: &'a Instance,
    rm: &'a RestrictionMatrix,
    target: NodeId,
    max_hops: usize,
    cap: usize,
    stack: Vec<NodeId>,
    on_stack: Vec<bool>,
    /// Prefix lengths, summed in path order.
    length: Vec<f64>,
    found: Vec<Path>,
}

impl Dfs<'_> {
    fn extend(&mut self) -> Result<(), ()> {
        let here = *self.stack.last().unwrap();
        if here == self.target {
            if self.found.len() == self.cap {
                return Err(());
            }
            let length_km = *self.length.last().unwrap();
            let arcs = self.stack.len() - 1;
            self.found.push(Path {
                nodes: self.stack.clone(),
                length_km,
                time: self.inst.travel_time(length_km, arcs),
            });
            return Ok(());
        }
        if self.stack.len() > self.max_hops {
            return Ok(());
        }
        let Some(next) = self.rm.allowed.get(&here) else { return Ok(()) };
        for &to in next {
            if self.on_stack[to.0] {
                continue;
            }
            let Some(km) = self.inst.distance(Arc { from: here, to }) else { continue };
            let len = *self.length.last().unwrap() + km;
            self.stack.push(to);
            self.length.push(len);
            self.on_stack[to.0] = true;
            let r = self.extend();
            self.on_stack[to.0] = false;
            self.length.pop();
            self.stack.pop();
            r?;
        }
        Ok(())
    }
}

/// Keeps the paths whose travel time fits the commodity's turnaround budget
/// (inclusive), preserving order.
pub fn filter_paths_by_tat(inst: &Instance, paths: Vec<Path>, k: CommodityId) -> Vec<Path> {
    let tat = inst.commodity(k).tat;
    paths.into_iter().filter(|p| p.time <= tat).collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PreprocessedInstance {
    pub paths: BTreeMap<CommodityId, Vec<Path>>,
    pub arcs_for: BTreeMap<CommodityId, BTreeSet<Arc>>,
    pub union_arcs: BTreeSet<Arc>,
    /// Commodities left without any path after filtering.
    pub infeasible: Vec<CommodityId>,
}

pub fn restrict(
    inst: &Instance,
    rm: &RestrictionMatrix,
    max_hops: usize,
) -> Result<PreprocessedInstance, PreprocessError> {
    restrict_capped(inst, rm, max_hops, DEFAULT_PATH_CAP)
}

pub fn restrict_capped(
    inst: &Instance,
    rm: &RestrictionMatrix,
    max_hops: usize,
    cap: usize,
) -> Result<PreprocessedInstance, PreprocessError> {
    let mut out = PreprocessedInstance::default();
    for k in inst.commodity_ids() {
        let paths = enumerate_paths_capped(inst, rm, k, max_hops, cap)?;
        let paths = filter_paths_by_tat(inst, paths, k);
        if paths.is_empty() {
            out.infeasible.push(k);
        }
        let arcs: BTreeSet<Arc> = paths.iter().flat_map(Path::arcs).collect();
        out.union_arcs.extend(arcs.iter().copied());
        out.arcs_for.insert(k, arcs);
        out.paths.insert(k, paths);
    }
    Ok(out)
}

/// `{commodity id: [[node, ...], ...]}` for inspection.
pub fn paths_to_json(inst: &Instance, pre: &PreprocessedInstance) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = pre
        .paths
        .iter()
        .map(|(k, paths)| {
            let list = paths
                .iter()
                .map(|p| p.nodes.iter().map(|&n| inst.node_name(n).to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>();
            (inst.commodity(*k).id.clone(), serde_json::json!(list))
        })
        .collect();
    serde_json::Value::Object(map)
}
