//! Seeded synthetic networks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::instance::{Arc, Commodity, Instance, NodeId};
use crate::model::{build_mip, model_stats, ModelStats};
use crate::preprocess::{build_restriction_matrix, restrict, RestrictionPolicy};

/// Side of the square nodes are placed in, km.
pub const AREA_KM: f64 = 100.0;
/// Mean outgoing arcs per node chosen by [`sized_config`].
pub const SIZING_OUT_DEGREE: f64 = 3.0;

fn default_capacity() -> f64 {
    40.0
}
fn default_cost() -> f64 {
    1.0
}
fn default_speed() -> f64 {
    60.0
}
fn default_hop() -> f64 {
    0.5
}
fn default_max_hops() -> usize {
    crate::preprocess::DEFAULT_MAX_HOPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub num_nodes: usize,
    /// Fraction of the `n(n-1)` ordered pairs that become arcs, nearest first.
    pub arc_density: f64,
    /// Inclusive integer load range.
    pub load_range: (f64, f64),
    /// Multiplier on each pair's fastest travel time.
    pub tat_slack: f64,
    /// Fraction of the ordered pairs that carry a commodity.
    pub commodity_fraction: f64,
    pub seed: u64,
    #[serde(default = "default_capacity")]
    pub vehicle_capacity: f64,
    #[serde(default = "default_cost")]
    pub vehicle_cost_per_km: f64,
    #[serde(default = "default_speed")]
    pub speed: f64,
    #[serde(default = "default_hop")]
    pub hop_processing_time: f64,
    /// Arc budget used for turnaround times and preprocessing.
    #[serde(default = "default_max_hops")]
    pub max_hops: usize,
}

impl GeneratorConfig {
    pub fn new(num_nodes: usize, arc_density: f64, commodity_fraction: f64, seed: u64) -> Self {
        GeneratorConfig {
            num_nodes,
            arc_density,
            load_range: (1.0, 20.0),
            tat_slack: 1.5,
            commodity_fraction,
            seed,
            vehicle_capacity: default_capacity(),
            vehicle_cost_per_km: default_cost(),
            speed: default_speed(),
            hop_processing_time: default_hop(),
            max_hops: default_max_hops(),
        }
    }

    pub fn num_pairs(&self) -> usize {
        self.num_nodes * self.num_nodes.saturating_sub(1)
    }

    pub fn num_commodities(&self) -> usize {
        (self.commodity_fraction * self.num_pairs() as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.to_string()));
        let frac = |f: f64| f > 0.0 && f <= 1.0;
        let (lo, hi) = self.load_range;
        if self.num_nodes < 2 {
            return bad("num_nodes must be at least 2");
        }
        if !frac(self.arc_density) {
            return bad("arc_density must lie in (0, 1]");
        }
        if !frac(self.commodity_fraction) {
            return bad("commodity_fraction must lie in (0, 1]");
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite() && lo.fract() == 0.0 && hi.fract() == 0.0) {
            return bad("load_range must be positive integers with min <= max");
        }
        if !(self.tat_slack >= 1.0 && self.tat_slack.is_finite()) {
            return bad("tat_slack must be at least 1");
        }
        let positive = [self.vehicle_capacity, self.vehicle_cost_per_km, self.speed];
        if positive.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return bad("vehicle_capacity, vehicle_cost_per_km and speed must be positive");
        }
        if !(self.hop_processing_time >= 0.0 && self.hop_processing_time.is_finite()) {
            return bad("hop_processing_time must be nonnegative");
        }
        if self.max_hops == 0 {
            return bad("max_hops must be at least 1");
        }
        Ok(())
    }
}

fn round_km(d: f64) -> f64 {
    ((d * 10.0).round() / 10.0).max(0.1)
}

pub fn generate_instance(cfg: &GeneratorConfig) -> Result<Instance, HarnessError> {
    cfg.validate()?;
    let n = cfg.num_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..AREA_KM), rng.gen_range(0.0..AREA_KM))).collect();
    let euclid = |i: usize, j: usize| {
        let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
        round_km(dx.hypot(dy))
    };

    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut by_distance = pairs.clone();
    by_distance.sort_by(|&(a, b), &(c, d)| euclid(a, b).total_cmp(&euclid(c, d)).then((a, b).cmp(&(c, d))));
    let num_arcs = (cfg.arc_density * by_distance.len() as f64).ceil() as usize;
    let mut distances: BTreeMap<Arc, f64> = BTreeMap::new();
    for &(i, j) in by_distance.iter().take(num_arcs) {
        distances.insert(Arc::new(i, j), euclid(i, j));
    }
    for i in 0..n {
        let j = (i + 1) % n;
        distances.insert(Arc::new(i, j), euclid(i, j));
    }

    pairs.shuffle(&mut rng);
    pairs.truncate(cfg.num_commodities().max(1));
    let (lo, hi) = (cfg.load_range.0 as u64, cfg.load_range.1 as u64);
    let mut chosen: Vec<((usize, usize), f64)> =
        pairs.into_iter().map(|p| (p, rng.gen_range(lo..=hi) as f64)).collect();
    chosen.sort_by_key(|&(p, _)| p);

    let mut inst = Instance {
        nodes: (1..=n).map(|i| i.to_string()).collect(),
        distances,
        vehicle_capacity: cfg.vehicle_capacity,
        vehicle_cost_per_km: cfg.vehicle_cost_per_km,
        commodities: Vec::with_capacity(chosen.len()),
        speed: cfg.speed,
        hop_processing_time: cfg.hop_processing_time,
    };
    for &((o, d), _) in &chosen {
        if fastest_time(&inst, NodeId(o), NodeId(d), cfg.max_hops).is_none() {
            inst.distances.insert(Arc::new(o, d), euclid(o, d));
        }
    }
    for (idx, &((o, d), load)) in chosen.iter().enumerate() {
        let t = fastest_time(&inst, NodeId(o), NodeId(d), cfg.max_hops).expect("direct arc added above");
        inst.commodities.push(Commodity {
            id: format!("k{}", idx + 1),
            origin: NodeId(o),
            destination: NodeId(d),
            load,
            tat: cfg.tat_slack * t,
        });
    }
    Ok(inst)
}

/// Fastest travel time from `o` to `d` over at most `max_hops` arcs, summing
/// lengths along the path in the same order as path enumeration so the value
/// equals that of an enumerated path bit for bit.
pub fn fastest_time(inst: &Instance, o: NodeId, d: NodeId, max_hops: usize) -> Option<f64> {
    let n = inst.nodes.len();
    let mut len = vec![f64::INFINITY; n];
    len[o.0] = 0.0;
    let mut best: Option<f64> = None;
    for hops in 1..=max_hops {
        let mut next = vec![f64::INFINITY; n];
        for (a, &km) in &inst.distances {
            let cand = len[a.from.0] + km;
            if cand < next[a.to.0] {
                next[a.to.0] = cand;
            }
        }
        len = next;
        if len[d.0].is_finite() {
            let t = inst.travel_time(len[d.0], hops);
            if best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        }
    }
    best
}

/// Model size of a generated instance under preprocessing with `policy`.
pub fn generated_stats(cfg: &GeneratorConfig, policy: RestrictionPolicy) -> Result<ModelStats, HarnessError> {
    let inst = generate_instance(cfg)?;
    let pre = restrict(&inst, &build_restriction_matrix(&inst, policy), cfg.max_hops)?;
    Ok(model_stats(&build_mip(&inst, &pre)?))
}

/// Searches node and commodity counts for a configuration whose model has
/// `target` variables within 10%. Arc density keeps about
/// [`SIZING_OUT_DEGREE`] arcs per node; everything else comes from
/// `template`. Returns the closest configuration found and its size.
pub fn sized_config(template: &GeneratorConfig, target: usize) -> Result<(GeneratorConfig, ModelStats), HarnessError> {
    let policy = RestrictionPolicy::All;
    let within = |v: usize| (v as f64 - target as f64).abs() <= 0.1 * target as f64;
    let mut closest: Option<(GeneratorConfig, ModelStats)> = None;
    let mut n = 4usize;
    while n <= 400 {
        let mut cfg = template.clone();
        cfg.num_nodes = n;
        cfg.arc_density = (SIZING_OUT_DEGREE / (n - 1) as f64).min(1.0);
        let pairs = cfg.num_pairs();
        let at = |count: usize| -> Result<(GeneratorConfig, ModelStats), HarnessError> {
            let mut c = cfg.clone();
            c.commodity_fraction = count as f64 / pairs as f64;
            let s = generated_stats(&c, policy)?;
            Ok((c, s))
        };
        let full = at(pairs)?;
        if full.1.num_variables >= target {
            // smallest count reaching the target; variables grow with count
            let (mut lo, mut hi) = (1usize, pairs);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if at(mid)?.1.num_variables >= target {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            for count in [lo.saturating_sub(1).max(1), lo] {
                let cand = at(count)?;
                let err = |s: &ModelStats| s.num_variables.abs_diff(target);
                if closest.as_ref().is_none_or(|(_, s)| err(&cand.1) < err(s)) {
                    closest = Some(cand);
                }
            }
            if closest.as_ref().is_some_and(|(_, s)| within(s.num_variables)) {
                break;
            }
        }
        n += (n / 4).max(1);
    }
    closest.ok_or(HarnessError::Sizing { target })
}
