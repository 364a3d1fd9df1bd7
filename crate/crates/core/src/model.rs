//! The mixed-integer routing model over the restricted arc sets.
//!
//! Variables are binary route indicators `x[k, (i,j)]` for every arc in a
//! commodity's arc subset and integer vehicle counts `N[(i,j)]` for every arc
//! used by at least one commodity. The objective is `sum d_ij * CV * N_ij`.
//! Flow conservation is stored in unit-flow form (each row divided by the
//! commodity load), capacity rows keep the loads: `sum_k L_k x_kij <= W N_ij`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Arc, CommodityId, Instance, NodeId};
use crate::preprocess::PreprocessedInstance;

/// Relative tolerance used by every feasibility comparison.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("commodity `{0}` has no admissible path")]
    InfeasibleCommodity(String),
    #[error("assignment does not match the model: {0}")]
    KeyMismatch(String),
    #[error("bound {bound} exceeds incumbent {incumbent} (or is negative)")]
    BoundExceedsIncumbent { incumbent: f64, bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XVar {
    pub commodity: CommodityId,
    pub arc: Arc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NVar {
    pub arc: Arc,
    pub km: f64,
    /// Tight upper bound: vehicles needed if every commodity that may use the
    /// arc does so.
    pub upper: u64,
}

/// `sum(coef * x) = rhs` in unit-flow form.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConstraint {
    pub node: NodeId,
    pub commodity: CommodityId,
    pub terms: Vec<(usize, i8)>,
    pub rhs: i8,
}

/// `sum(load * x) <= W * N[n_var]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityConstraint {
    pub arc: Arc,
    pub n_var: usize,
    pub terms: Vec<(usize, f64)>,
}

/// A surviving path of a commodity expressed in model indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPath {
    pub nodes: Vec<NodeId>,
    pub length_km: f64,
    pub x: Vec<usize>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCommodity {
    pub id: CommodityId,
    pub name: String,
    pub load: f64,
    pub paths: Vec<ModelPath>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub x_vars: Vec<XVar>,
    pub n_vars: Vec<NVar>,
    /// Cost per vehicle for each `n_vars` entry.
    pub objective: Vec<f64>,
    pub flow_constraints: Vec<FlowConstraint>,
    pub capacity_constraints: Vec<CapacityConstraint>,
    pub vehicle_capacity: f64,
    pub cost_per_km: f64,
    /// Commodities with positive load, in instance order.
    pub commodities: Vec<ModelCommodity>,
    pub node_names: Vec<String>,
}

/// A candidate solution; vectors are aligned with `x_vars` / `n_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pub x: Vec<bool>,
    pub n: Vec<u64>,
}

/// One path index per model commodity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowViolation {
    pub node: String,
    pub commodity: String,
    /// `outflow - inflow - supply` in load units.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityViolation {
    pub from: String,
    pub to: String,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub flow_violations: Vec<FlowViolation>,
    pub capacity_violations: Vec<CapacityViolation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    pub num_variables: usize,
    pub num_constraints: usize,
}

/// Whole vehicles needed to carry `load`.
pub fn vehicles_needed(load: f64, capacity: f64) -> u64 {
    let v = (load / capacity - FEAS_TOL).ceil();
    if v > 0.0 {
        v as u64
    } else {
        0
    }
}

pub fn build_mip(inst: &Instance, pre: &PreprocessedInstance) -> Result<MipModel, ModelError> {
    let kept: Vec<CommodityId> = inst.commodity_ids().filter(|&k| inst.commodity(k).load > 0.0).collect();
    for &k in &kept {
        if pre.paths.get(&k).is_none_or(|p| p.is_empty()) {
            return Err(ModelError::InfeasibleCommodity(inst.commodity(k).id.clone()));
        }
    }

    let mut x_vars = Vec::new();
    let mut x_index = HashMap::new();
    // Worst-case load per arc over the kept commodities.
    let mut arc_load: BTreeMap<Arc, f64> = BTreeMap::new();
    for &k in &kept {
        for &arc in &pre.arcs_for[&k] {
            x_index.insert((k, arc), x_vars.len());
            x_vars.push(XVar { commodity: k, arc });
            *arc_load.entry(arc).or_default() += inst.commodity(k).load;
        }
    }

    let w = inst.vehicle_capacity;
    let cv = inst.vehicle_cost_per_km;
    let mut n_vars = Vec::with_capacity(arc_load.len());
    let mut n_index = HashMap::new();
    for (&arc, &load) in &arc_load {
        n_index.insert(arc, n_vars.len());
        let km = inst.distance(arc).expect("restricted arcs exist in the instance");
        n_vars.push(NVar { arc, km, upper: vehicles_needed(load, w) });
    }
    let objective = n_vars.iter().map(|v| v.km * cv).collect();

    let mut flow_constraints = Vec::new();
    for &k in &kept {
        let c = inst.commodity(k);
        let base = flow_constraints.len();
        for i in 0..inst.nodes.len() {
            let rhs = if NodeId(i) == c.origin {
                1
            } else if NodeId(i) == c.destination {
                -1
            } else {
                0
            };
            flow_constraints.push(FlowConstraint { node: NodeId(i), commodity: k, terms: Vec::new(), rhs });
        }
        for &arc in &pre.arcs_for[&k] {
            let x = x_index[&(k, arc)];
            flow_constraints[base + arc.from.0].terms.push((x, 1));
            flow_constraints[base + arc.to.0].terms.push((x, -1));
        }
    }

    let mut capacity_constraints: Vec<CapacityConstraint> = n_vars
        .iter()
        .enumerate()
        .map(|(n_var, v)| CapacityConstraint { arc: v.arc, n_var, terms: Vec::new() })
        .collect();
    for (xi, xv) in x_vars.iter().enumerate() {
        let load = inst.commodity(xv.commodity).load;
        capacity_constraints[n_index[&xv.arc]].terms.push((xi, load));
    }

    let commodities = kept
        .iter()
        .map(|&k| {
            let paths = pre.paths[&k]
                .iter()
                .map(|p| ModelPath {
                    nodes: p.nodes.clone(),
                    length_km: p.length_km,
                    x: p.arcs().map(|a| x_index[&(k, a)]).collect(),
                    n: p.arcs().map(|a| n_index[&a]).collect(),
                })
                .collect();
            ModelCommodity { id: k, name: inst.commodity(k).id.clone(), load: inst.commodity(k).load, paths }
        })
        .collect();

    Ok(MipModel {
        x_vars,
        n_vars,
        objective,
        flow_constraints,
        capacity_constraints,
        vehicle_capacity: w,
        cost_per_km: cv,
        commodities,
        node_names: inst.nodes.clone(),
    })
}

impl MipModel {
    pub fn is_empty(&self) -> bool {
        self.x_vars.is_empty() && self.n_vars.is_empty()
    }

    fn check_shape(&self, a: &Assignment) -> Result<(), ModelError> {
        if a.x.len() != self.x_vars.len() || a.n.len() != self.n_vars.len() {
            return Err(ModelError::KeyMismatch(format!(
                "expected {} x and {} n values, got {} and {}",
                self.x_vars.len(),
                self.n_vars.len(),
                a.x.len(),
                a.n.len()
            )));
        }
        Ok(())
    }

    pub fn zero_assignment(&self) -> Assignment {
        Assignment { x: vec![false; self.x_vars.len()], n: vec![0; self.n_vars.len()] }
    }

    /// Load carried on every arc (aligned with `n_vars`).
    pub fn arc_loads(&self, x: &[bool]) -> Vec<f64> {
        self.capacity_constraints
            .iter()
            .map(|c| c.terms.iter().filter(|&&(xi, _)| x[xi]).map(|&(_, l)| l).sum())
            .collect()
    }

    /// Replaces the vehicle counts by the fewest that carry the routed load.
    pub fn with_minimal_vehicles(&self, x: Vec<bool>) -> Assignment {
        let n = self.arc_loads(&x).into_iter().map(|l| vehicles_needed(l, self.vehicle_capacity)).collect();
        Assignment { x, n }
    }

    pub fn routing_assignment(&self, routing: &Routing) -> Assignment {
        let mut x = vec![false; self.x_vars.len()];
        for (c, &p) in self.commodities.iter().zip(&routing.0) {
            for &xi in &c.paths[p].x {
                x[xi] = true;
            }
        }
        self.with_minimal_vehicles(x)
    }

    /// The routing whose paths reproduce `x` exactly, if every commodity's
    /// active arcs form one of its enumerated paths.
    pub fn routing_of(&self, x: &[bool]) -> Option<Routing> {
        let mut active: Vec<Vec<usize>> = vec![Vec::new(); self.commodities.len()];
        let pos: HashMap<CommodityId, usize> = self.commodities.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        for (xi, v) in self.x_vars.iter().enumerate() {
            if x[xi] {
                active[pos[&v.commodity]].push(xi);
            }
        }
        let mut choice = Vec::with_capacity(self.commodities.len());
        for (c, mut on) in self.commodities.iter().zip(active) {
            on.sort_unstable();
            let p = c.paths.iter().position(|p| {
                let mut xs = p.x.clone();
                xs.sort_unstable();
                xs == on
            })?;
            choice.push(p);
        }
        Some(Routing(choice))
    }

    pub fn x_key(&self, v: &XVar, commodity_name: &str) -> String {
        format!("{}|{}|{}", commodity_name, self.node_names[v.arc.from.0], self.node_names[v.arc.to.0])
    }

    pub fn n_key(&self, v: &NVar) -> String {
        format!("{}|{}", self.node_names[v.arc.from.0], self.node_names[v.arc.to.0])
    }

    fn commodity_name(&self, k: CommodityId) -> &str {
        self.commodities.iter().find(|c| c.id == k).map(|c| c.name.as_str()).unwrap_or("?")
    }

    fn commodity_load(&self, k: CommodityId) -> f64 {
        self.commodities.iter().find(|c| c.id == k).map(|c| c.load).unwrap_or(0.0)
    }

    /// `{x: {"k|i|j": 0/1}, n: {"i|j": count}}`.
    pub fn assignment_to_json(&self, a: &Assignment) -> serde_json::Value {
        let x: serde_json::Map<_, _> = self
            .x_vars
            .iter()
            .zip(&a.x)
            .map(|(v, &on)| (self.x_key(v, self.commodity_name(v.commodity)), serde_json::json!(on as u8)))
            .collect();
        let n: serde_json::Map<_, _> =
            self.n_vars.iter().zip(&a.n).map(|(v, &c)| (self.n_key(v), serde_json::json!(c))).collect();
        serde_json::json!({ "x": x, "n": n })
    }

    pub fn assignment_from_json(&self, doc: &serde_json::Value) -> Result<Assignment, ModelError> {
        let mismatch = |m: String| ModelError::KeyMismatch(m);
        let section = |name: &str| {
            doc.get(name).and_then(|v| v.as_object()).ok_or_else(|| mismatch(format!("missing object `{name}`")))
        };
        let xs = section("x")?;
        let ns = section("n")?;
        let mut a = self.zero_assignment();
        for (i, v) in self.x_vars.iter().enumerate() {
            let key = self.x_key(v, self.commodity_name(v.commodity));
            a.x[i] = match xs.get(&key).and_then(|v| v.as_u64()) {
                Some(0) => false,
                Some(1) => true,
                _ => return Err(mismatch(format!("x entry `{key}` missing or not 0/1"))),
            };
        }
        for (i, v) in self.n_vars.iter().enumerate() {
            let key = self.n_key(v);
            a.n[i] = xs_u64(ns, &key).ok_or_else(|| mismatch(format!("n entry `{key}` missing or not a count")))?;
        }
        if xs.len() != self.x_vars.len() || ns.len() != self.n_vars.len() {
            return Err(mismatch("assignment has keys that are not model variables".into()));
        }
        Ok(a)
    }
}

fn xs_u64(map: &serde_json::Map<String, serde_json::Value>, key: &str) -> Option<u64> {
    map.get(key).and_then(|v| v.as_u64())
}

/// `sum d_ij * CV * N_ij`; route indicators carry no cost.
pub fn objective_value(m: &MipModel, a: &Assignment) -> Result<f64, ModelError> {
    m.check_shape(a)?;
    Ok(m.objective.iter().zip(&a.n).map(|(c, &n)| c * n as f64).sum())
}

pub fn check_feasibility(m: &MipModel, a: &Assignment) -> Result<FeasibilityReport, ModelError> {
    m.check_shape(a)?;
    let mut flow_violations = Vec::new();
    for fc in &m.flow_constraints {
        let lhs: i64 = fc.terms.iter().filter(|&&(xi, _)| a.x[xi]).map(|&(_, c)| c as i64).sum();
        let residual = lhs - fc.rhs as i64;
        if residual != 0 {
            flow_violations.push(FlowViolation {
                node: m.node_names[fc.node.0].clone(),
                commodity: m.commodity_name(fc.commodity).to_string(),
                residual: residual as f64 * m.commodity_load(fc.commodity),
            });
        }
    }
    let w = m.vehicle_capacity;
    let mut capacity_violations = Vec::new();
    for (cc, load) in m.capacity_constraints.iter().zip(m.arc_loads(&a.x)) {
        let excess = load - a.n[cc.n_var] as f64 * w;
        if excess > FEAS_TOL * load.max(w) {
            capacity_violations.push(CapacityViolation {
                from: m.node_names[cc.arc.from.0].clone(),
                to: m.node_names[cc.arc.to.0].clone(),
                excess,
            });
        }
    }
    Ok(FeasibilityReport {
        feasible: flow_violations.is_empty() && capacity_violations.is_empty(),
        flow_violations,
        capacity_violations,
    })
}

pub fn model_stats(m: &MipModel) -> ModelStats {
    ModelStats {
        num_variables: m.x_vars.len() + m.n_vars.len(),
        num_constraints: m.flow_constraints.len() + m.capacity_constraints.len(),
    }
}

/// Relative distance between incumbent and lower bound,
/// `|incumbent - bound| / (1e-10 + |incumbent|)`.
pub fn mip_gap(incumbent: f64, bound: f64) -> Result<f64, ModelError> {
    let slack = FEAS_TOL * incumbent.abs().max(1.0);
    if bound < 0.0 || bound > incumbent + slack || incumbent.is_nan() || bound.is_nan() {
        return Err(ModelError::BoundExceedsIncumbent { incumbent, bound });
    }
    Ok((incumbent - bound).abs() / (1e-10 + incumbent.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{t1, t1_with_tat};
    use crate::preprocess::{build_restriction_matrix, restrict, RestrictionPolicy};

    fn model_for(inst: &Instance) -> MipModel {
        let rm = build_restriction_matrix(inst, RestrictionPolicy::All);
        build_mip(inst, &restrict(inst, &rm, 2).unwrap()).unwrap()
    }

    fn direct_t1(m: &MipModel) -> Assignment {
        let mut a = m.zero_assignment();
        let xi = m.x_vars.iter().position(|v| v.arc == Arc::new(0, 2)).unwrap();
        let ni = m.n_vars.iter().position(|v| v.arc == Arc::new(0, 2)).unwrap();
        a.x[xi] = true;
        a.n[ni] = 1;
        a
    }

    #[test]
    fn build_sizes() {
        let m = model_for(&t1_with_tat(12.0));
        assert_eq!((m.x_vars.len(), m.n_vars.len()), (3, 3));
        assert_eq!((m.flow_constraints.len(), m.capacity_constraints.len()), (3, 3));
        assert_eq!(model_stats(&m), ModelStats { num_variables: 6, num_constraints: 6 });
        assert!(m.n_vars.iter().all(|v| v.upper == 1));

        let m = model_for(&t1_with_tat(11.0));
        assert_eq!((m.x_vars.len(), m.n_vars.len()), (1, 1));
        assert_eq!((m.flow_constraints.len(), m.capacity_constraints.len()), (3, 1));
        assert_eq!(model_stats(&m), ModelStats { num_variables: 2, num_constraints: 4 });
    }

    #[test]
    fn structural_invariants() {
        let m = model_for(&t1_with_tat(12.0));
        for (xi, v) in m.x_vars.iter().enumerate() {
            let rows: Vec<_> = m.flow_constraints.iter().filter(|fc| fc.terms.iter().any(|&(t, _)| t == xi)).collect();
            assert_eq!(rows.len(), 2);
            assert!(rows.iter().all(|fc| fc.commodity == v.commodity));
        }
        for cc in &m.capacity_constraints {
            assert!(cc.terms.iter().all(|&(xi, _)| m.x_vars[xi].arc == cc.arc));
        }
        assert!(m.objective.iter().all(|&c| c > 0.0));
    }

    #[test]
    fn empty_and_zero_load() {
        let mut inst = t1();
        inst.commodities.clear();
        let m = model_for(&inst);
        assert!(m.is_empty());
        assert_eq!(model_stats(&m), ModelStats { num_variables: 0, num_constraints: 0 });

        let mut inst = t1();
        inst.commodities[0].load = 0.0;
        inst.commodities[0].tat = 1.0;
        assert_eq!(model_stats(&model_for(&inst)).num_variables, 0);
    }

    #[test]
    fn infeasible_commodity() {
        let inst = t1_with_tat(5.0);
        let rm = build_restriction_matrix(&inst, RestrictionPolicy::All);
        let pre = restrict(&inst, &rm, 2).unwrap();
        assert_eq!(build_mip(&inst, &pre), Err(ModelError::InfeasibleCommodity("k1".into())));
    }

    #[test]
    fn objective() {
        let m = model_for(&t1_with_tat(12.0));
        let mut a = direct_t1(&m);
        assert_eq!(objective_value(&m, &a).unwrap(), 10.0);
        assert_eq!(objective_value(&m, &m.zero_assignment()).unwrap(), 0.0);
        let ni = a.n.iter().position(|&n| n == 1).unwrap();
        a.n[ni] = 2;
        assert_eq!(objective_value(&m, &a).unwrap(), 20.0);
        let short = Assignment { x: vec![], n: vec![] };
        assert!(matches!(objective_value(&m, &short), Err(ModelError::KeyMismatch(_))));
    }

    #[test]
    fn feasibility() {
        let m = model_for(&t1_with_tat(12.0));
        let a = direct_t1(&m);
        assert!(check_feasibility(&m, &a).unwrap().feasible);

        let r = check_feasibility(&m, &m.zero_assignment()).unwrap();
        assert!(!r.feasible);
        let res: Vec<_> = r.flow_violations.iter().map(|v| (v.node.as_str(), v.residual)).collect();
        assert_eq!(res, vec![("1", -10.0), ("3", 10.0)]);
        assert!(r.capacity_violations.is_empty());

        let mut a = direct_t1(&m);
        a.n.iter_mut().for_each(|n| *n = 0);
        let r = check_feasibility(&m, &a).unwrap();
        assert!(r.flow_violations.is_empty());
        assert_eq!(r.capacity_violations.len(), 1);
        assert_eq!((r.capacity_violations[0].from.as_str(), r.capacity_violations[0].excess), ("1", 10.0));
    }

    #[test]
    fn routing_round_trip() {
        let m = model_for(&t1_with_tat(12.0));
        for p in 0..2 {
            let a = m.routing_assignment(&Routing(vec![p]));
            assert!(check_feasibility(&m, &a).unwrap().feasible);
            assert_eq!(m.routing_of(&a.x), Some(Routing(vec![p])));
        }
        assert_eq!(m.routing_of(&m.zero_assignment().x), None);
    }

    #[test]
    fn assignment_json() {
        let m = model_for(&t1_with_tat(12.0));
        let a = direct_t1(&m);
        let doc = m.assignment_to_json(&a);
        assert_eq!(doc["x"]["k1|1|3"], 1);
        assert_eq!(doc["n"]["1|3"], 1);
        assert_eq!(m.assignment_from_json(&doc).unwrap(), a);

        let mut extra = doc.clone();
        extra["n"]["3|1"] = serde_json::json!(0);
        assert!(matches!(m.assignment_from_json(&extra), Err(ModelError::KeyMismatch(_))));
        let mut missing = doc;
        missing["x"].as_object_mut().unwrap().remove("k1|1|3");
        assert!(matches!(m.assignment_from_json(&missing), Err(ModelError::KeyMismatch(_))));
    }

    #[test]
    fn gap() {
        assert_eq!(mip_gap(100.0, 100.0).unwrap(), 0.0);
        assert!((mip_gap(100.0, 67.2).unwrap() - 0.328).abs() <= 1e-12);
        assert_eq!(mip_gap(0.0, 0.0).unwrap(), 0.0);
        assert!(mip_gap(10.0, 11.0).is_err());
        assert!(mip_gap(10.0, -1.0).is_err());
    }

    #[test]
    fn vehicle_rounding() {
        assert_eq!(vehicles_needed(0.0, 15.0), 0);
        assert_eq!(vehicles_needed(10.0, 15.0), 1);
        assert_eq!(vehicles_needed(15.0, 15.0), 1);
        assert_eq!(vehicles_needed(15.1, 15.0), 2);
        assert_eq!(vehicles_needed(0.1 + 0.2, 0.3), 1);
    }
}
