//! Problem data for the line-haul network: processing-center nodes, directed
//! arcs with distances, commodities (origin/destination loads with a
//! turnaround budget) and the single vehicle type.
//!
//! Node and commodity ids are strings in documents; internally they are
//! resolved to positional indices ([`NodeId`], [`CommodityId`]) and every
//! ordering tie-break in the crate uses those indices (document order).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a node in [`Instance::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Index of a commodity in [`Instance::commodities`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommodityId(pub usize);

/// A directed arc `(from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
}

impl Arc {
    pub fn new(from: usize, to: usize) -> Self {
        Arc { from: NodeId(from), to: NodeId(to) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commodity {
    pub id: String,
    pub origin: NodeId,
    pub destination: NodeId,
    pub load: f64,
    /// Turnaround time budget in hours.
    pub tat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub nodes: Vec<String>,
    /// Directed distances in km. Absent pairs are not arcs.
    pub distances: BTreeMap<Arc, f64>,
    pub vehicle_capacity: f64,
    pub vehicle_cost_per_km: f64,
    pub commodities: Vec<Commodity>,
    /// km per hour.
    pub speed: f64,
    /// Hours spent at each intermediate node of a path.
    pub hop_processing_time: f64,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance document: {0}")]
    Parse(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },
}

impl Instance {
    pub fn distance(&self, arc: Arc) -> Option<f64> {
        self.distances.get(&arc).copied()
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.distances.keys().copied()
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n == name).map(NodeId)
    }

    pub fn commodity_id(&self, id: &str) -> Option<CommodityId> {
        self.commodities.iter().position(|c| c.id == id).map(CommodityId)
    }

    pub fn commodity(&self, k: CommodityId) -> &Commodity {
        &self.commodities[k.0]
    }

    pub fn commodity_ids(&self) -> impl Iterator<Item = CommodityId> {
        (0..self.commodities.len()).map(CommodityId)
    }

    /// Travel time of a node sequence: driving time plus processing at every
    /// intermediate node.
    pub fn travel_time(&self, length_km: f64, num_arcs: usize) -> f64 {
        let hops = num_arcs.saturating_sub(1) as f64;
        length_km / self.speed + self.hop_processing_time * hops
    }

    /// Outgoing adjacency over the arc set, successors in id order.
    pub fn successors(&self) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
        let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for a in self.arcs() {
            adj.entry(a.from).or_default().insert(a.to);
        }
        adj
    }
}

/// Net supply of commodity `k` at node `i`: `+L_k` at the origin, `-L_k` at
/// the destination, zero elsewhere.
pub fn supply_value(inst: &Instance, k: CommodityId, i: NodeId) -> Result<f64, InstanceError> {
    let c =
        inst.commodities.get(k.0).ok_or_else(|| InstanceError::UnknownId { kind: "commodity", id: k.0.to_string() })?;
    if i.0 >= inst.nodes.len() {
        return Err(InstanceError::UnknownId { kind: "node", id: i.0.to_string() });
    }
    Ok(if i == c.origin {
        c.load
    } else if i == c.destination {
        -c.load
    } else {
        0.0
    })
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn from_issues(issues: Vec<Issue>) -> Self {
        let ok = issues.iter().all(|i| i.severity != Severity::Error);
        ValidationReport { ok, issues }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.issues {
            let sev = match i.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{sev}: {} ({})", i.message, i.location)?;
        }
        Ok(())
    }
}

/// Reports every invariant violation of `inst`. Never fails.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut issues = Vec::new();
    let mut error =
        |message: String, location: String| issues.push(Issue { severity: Severity::Error, message, location });
    let n = inst.nodes.len();
    let node_label = |id: NodeId| inst.nodes.get(id.0).cloned().unwrap_or_else(|| format!("#{}", id.0));

    let mut seen = BTreeSet::new();
    for (idx, name) in inst.nodes.iter().enumerate() {
        if !seen.insert(name.as_str()) {
            error(format!("duplicate node id `{name}`"), format!("nodes[{idx}]"));
        }
    }

    for (&arc, &km) in &inst.distances {
        let loc = format!("arc ({}, {})", node_label(arc.from), node_label(arc.to));
        if arc.from.0 >= n || arc.to.0 >= n {
            error("arc references a node that does not exist".into(), loc.clone());
        }
        if arc.from == arc.to {
            error("self-arcs are not allowed".into(), loc.clone());
        }
        if !km.is_finite() || km <= 0.0 {
            error(format!("distance must be finite and positive, got {km}"), loc);
        }
    }

    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(inst.vehicle_capacity) {
        error("vehicle_capacity must be positive".into(), "vehicle.capacity".into());
    }
    if !positive(inst.vehicle_cost_per_km) {
        error("vehicle_cost_per_km must be positive".into(), "vehicle.cost_per_km".into());
    }
    if !positive(inst.speed) {
        error("speed must be positive".into(), "time_model.speed".into());
    }
    if !(inst.hop_processing_time.is_finite() && inst.hop_processing_time >= 0.0) {
        error("hop_processing_time must be nonnegative".into(), "time_model.hop_processing_time".into());
    }

    let mut seen = BTreeSet::new();
    for (idx, c) in inst.commodities.iter().enumerate() {
        let loc = format!("commodities[{idx}] ({})", c.id);
        if !seen.insert(c.id.as_str()) {
            error(format!("duplicate commodity id `{}`", c.id), loc.clone());
        }
        if c.origin.0 >= n || c.destination.0 >= n {
            error("commodity references a node that does not exist".into(), loc.clone());
        }
        if c.origin == c.destination {
            error("origin and destination must differ".into(), loc.clone());
        }
        if !(c.load.is_finite() && c.load >= 0.0) {
            error(format!("load must be nonnegative, got {}", c.load), loc.clone());
        }
        if !positive(c.tat) {
            error(format!("tat must be positive, got {}", c.tat), loc);
        }
    }

    ValidationReport::from_issues(issues)
}

// ---------------------------------------------------------------------------
// Document format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    nodes: Vec<String>,
    arcs: Vec<ArcDoc>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    symmetric: bool,
    vehicle: VehicleDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time_model: Option<TimeModelDoc>,
    commodities: Vec<CommodityDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcDoc {
    from: String,
    to: String,
    km: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleDoc {
    capacity: f64,
    cost_per_km: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeModelDoc {
    #[serde(default = "default_speed")]
    speed: f64,
    #[serde(default)]
    hop_processing_time: f64,
}

fn default_speed() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommodityDoc {
    id: String,
    origin: String,
    destination: String,
    load: f64,
    tat: f64,
}

/// Parses an instance document. Referential integrity is enforced here;
/// numeric invariants are left to [`validate_instance`].
pub fn load_instance(document: &str) -> Result<Instance, InstanceError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_data() {
            InstanceError::Schema { path, message: inner.to_string() }
        } else {
            InstanceError::Parse(inner.to_string())
        }
    })?;

    let mut index = BTreeMap::new();
    for (i, name) in doc.nodes.iter().enumerate() {
        if index.insert(name.clone(), NodeId(i)).is_some() {
            return Err(InstanceError::Schema {
                path: format!("nodes[{i}]"),
                message: format!("duplicate node id `{name}`"),
            });
        }
    }
    let resolve = |name: &str, path: String| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| InstanceError::Schema { path, message: format!("unknown node `{name}`") })
    };

    let mut distances = BTreeMap::new();
    for (i, a) in doc.arcs.iter().enumerate() {
        let from = resolve(&a.from, format!("arcs[{i}].from"))?;
        let to = resolve(&a.to, format!("arcs[{i}].to"))?;
        let mut put = |arc: Arc| -> Result<(), InstanceError> {
            match distances.insert(arc, a.km) {
                Some(prev) if prev != a.km => Err(InstanceError::Schema {
                    path: format!("arcs[{i}]"),
                    message: format!(
                        "conflicting distances for arc ({}, {}): {prev} vs {}",
                        doc.nodes[arc.from.0], doc.nodes[arc.to.0], a.km
                    ),
                }),
                _ => Ok(()),
            }
        };
        put(Arc { from, to })?;
        if doc.symmetric {
            put(Arc { from: to, to: from })?;
        }
    }

    let mut commodities = Vec::with_capacity(doc.commodities.len());
    for (i, c) in doc.commodities.iter().enumerate() {
        commodities.push(Commodity {
            id: c.id.clone(),
            origin: resolve(&c.origin, format!("commodities[{i}].origin"))?,
            destination: resolve(&c.destination, format!("commodities[{i}].destination"))?,
            load: c.load,
            tat: c.tat,
        });
    }

    let (speed, hop_processing_time) = match doc.time_model {
        Some(t) => (t.speed, t.hop_processing_time),
        None => (default_speed(), 0.0),
    };

    Ok(Instance {
        nodes: doc.nodes,
        distances,
        vehicle_capacity: doc.vehicle.capacity,
        vehicle_cost_per_km: doc.vehicle.cost_per_km,
        commodities,
        speed,
        hop_processing_time,
    })
}

/// Serializes to the instance document format with every arc listed
/// explicitly (no `symmetric` expansion).
pub fn to_document(inst: &Instance) -> String {
    let name = |n: NodeId| inst.nodes[n.0].clone();
    let doc = Document {
        nodes: inst.nodes.clone(),
        arcs: inst.distances.iter().map(|(a, &km)| ArcDoc { from: name(a.from), to: name(a.to), km }).collect(),
        symmetric: false,
        vehicle: VehicleDoc { capacity: inst.vehicle_capacity, cost_per_km: inst.vehicle_cost_per_km },
        time_model: Some(TimeModelDoc { speed: inst.speed, hop_processing_time: inst.hop_processing_time }),
        commodities: inst
            .commodities
            .iter()
            .map(|c| CommodityDoc {
                id: c.id.clone(),
                origin: name(c.origin),
                destination: name(c.destination),
                load: c.load,
                tat: c.tat,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("instance document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{t1, T1_JSON};

    #[test]
    fn t1_loads() {
        let inst = load_instance(T1_JSON).unwrap();
        assert_eq!(inst.nodes.len(), 3);
        assert_eq!(inst.distances.len(), 6);
        assert_eq!(inst.commodities.len(), 1);
        assert_eq!(inst.distance(Arc::new(2, 0)), Some(10.0));
        assert_eq!(inst.speed, 1.0);
        assert_eq!(inst.hop_processing_time, 0.0);
    }

    #[test]
    fn unknown_commodity_node_is_schema_error() {
        let doc = T1_JSON.replace(r#""destination": "3""#, r#""destination": "99""#);
        match load_instance(&doc) {
            Err(InstanceError::Schema { path, message }) => {
                assert!(message.contains("99"), "{message}");
                assert_eq!(path, "commodities[0].destination");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_reports_path() {
        let doc = T1_JSON.replace(r#""capacity": 15,"#, "");
        match load_instance(&doc) {
            Err(InstanceError::Schema { path, message }) => {
                assert_eq!(path, "vehicle");
                assert!(message.contains("capacity"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let doc = T1_JSON.replacen('{', r#"{"colour": "red","#, 1);
        assert!(matches!(load_instance(&doc), Err(InstanceError::Schema { .. })));
    }

    #[test]
    fn malformed_is_parse_error() {
        assert!(matches!(load_instance("{\"nodes\": [\"1\","), Err(InstanceError::Parse(_))));
    }

    #[test]
    fn empty_commodities_ok() {
        let mut inst = t1();
        inst.commodities.clear();
        let again = load_instance(&to_document(&inst)).unwrap();
        assert!(again.commodities.is_empty());
        assert!(validate_instance(&again).ok);
    }

    #[test]
    fn validation() {
        let inst = t1();
        let r = validate_instance(&inst);
        assert!(r.ok && r.issues.is_empty());

        let mut bad = inst.clone();
        bad.vehicle_capacity = 0.0;
        let r = validate_instance(&bad);
        assert!(!r.ok);
        assert_eq!(r.issues[0].message, "vehicle_capacity must be positive");

        let mut bad = inst.clone();
        bad.distances.insert(Arc::new(0, 2), -1.0);
        let r = validate_instance(&bad);
        assert!(!r.ok);
        assert_eq!(r.issues.len(), 1);
        assert_eq!(r.issues[0].location, "arc (1, 3)");

        let mut bad = inst;
        bad.commodities[0].destination = NodeId(0);
        bad.commodities[0].tat = 0.0;
        bad.hop_processing_time = -1.0;
        assert_eq!(validate_instance(&bad).issues.len(), 3);
    }

    #[test]
    fn supply_values() {
        let inst = t1();
        let k = CommodityId(0);
        assert_eq!(supply_value(&inst, k, NodeId(0)).unwrap(), 10.0);
        assert_eq!(supply_value(&inst, k, NodeId(2)).unwrap(), -10.0);
        assert_eq!(supply_value(&inst, k, NodeId(1)).unwrap(), 0.0);
        assert!(supply_value(&inst, CommodityId(4), NodeId(0)).is_err());
        assert!(supply_value(&inst, k, NodeId(7)).is_err());
    }

    #[test]
    fn conflicting_symmetric_arcs_rejected() {
        let doc = T1_JSON.replace(
            r#"{"from": "1", "to": "3", "km": 10}"#,
            r#"{"from": "1", "to": "3", "km": 10}, {"from": "3", "to": "1", "km": 11}"#,
        );
        assert!(matches!(load_instance(&doc), Err(InstanceError::Schema { .. })));
    }
}
