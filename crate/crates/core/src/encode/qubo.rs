use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::expand::{binary_expand, BitGroup};
use super::EncodeError;
use crate::model::{vehicles_needed, Assignment, MipModel};

/// Bit-count ceiling for one arc's capacity slack.
pub const MAX_SLACK_BITS: u32 = 12;

/// What a QUBO bit stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuboVar {
    /// Route indicator, index into `MipModel::x_vars`.
    X { x: usize },
    /// Bit of the vehicle count of `n_var`.
    NBit { n_var: usize, weight: u64 },
    /// Bit of the capacity slack of `n_var`.
    SlackBit { n_var: usize, weight: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyConfig {
    pub flow_penalty: f64,
    pub capacity_penalty: f64,
    /// Weight granularity of the capacity slack.
    pub slack_unit: f64,
}

impl PenaltyConfig {
    /// Both penalties at `2 * CV * longest path * largest vehicle bound`,
    /// slack unit from [`default_slack_unit`].
    pub fn for_model(m: &MipModel) -> Self {
        let longest = m.commodities.iter().flat_map(|c| c.paths.iter().map(|p| p.length_km)).fold(0.0, f64::max);
        let n_max = m.n_vars.iter().map(|v| v.upper).max().unwrap_or(1).max(1);
        let p = 2.0 * m.cost_per_km * longest * n_max as f64;
        let p = if p > 0.0 { p } else { 1.0 };
        PenaltyConfig { flow_penalty: p, capacity_penalty: p, slack_unit: default_slack_unit(m) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodeWarning {
    /// The flow penalty is below twice the costliest single path, so dropping a
    /// commodity may be energetically favourable.
    PenaltyTooSmall { flow_penalty: f64, safety_bound: f64 },
    /// Loads are not integer multiples of the slack unit; exact capacity
    /// equality may be unreachable and feasible states carry a small residual.
    InexactSlack { slack_unit: f64 },
}

/// Upper-triangular quadratic model over binary variables,
/// `E(b) = sum_{p<=q} Q_pq b_p b_q + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    pub size: usize,
    pub terms: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub varmap: Vec<QuboVar>,
    pub n_groups: Vec<BitGroup>,
    pub slack_groups: Vec<BitGroup>,
    pub penalties: PenaltyConfig,
    pub warnings: Vec<EncodeWarning>,
    pub(crate) num_x: usize,
    pub(crate) vehicle_capacity: f64,
    /// `(x index, load)` per arc, aligned with `n_groups`.
    pub(crate) arc_terms: Vec<Vec<(usize, f64)>>,
}

impl Qubo {
    /// A bare matrix without model linkage.
    pub fn from_terms(size: usize, terms: BTreeMap<(usize, usize), f64>, offset: f64) -> Self {
        let terms = terms.into_iter().filter(|&(_, c)| c != 0.0).collect();
        Qubo {
            size,
            terms,
            offset,
            varmap: (0..size).map(|x| QuboVar::X { x }).collect(),
            n_groups: Vec::new(),
            slack_groups: Vec::new(),
            penalties: PenaltyConfig { flow_penalty: 1.0, capacity_penalty: 1.0, slack_unit: 1.0 },
            warnings: Vec::new(),
            num_x: size,
            vehicle_capacity: 1.0,
            arc_terms: Vec::new(),
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Bit image of an assignment: route bits copied, vehicle counts and
    /// slacks expanded. Values beyond a group's range are clamped.
    pub fn bits_for(&self, a: &Assignment) -> Vec<bool> {
        let mut bits = vec![false; self.size];
        bits[..self.num_x].copy_from_slice(&a.x[..self.num_x]);
        let u = self.penalties.slack_unit;
        let w = self.vehicle_capacity;
        for (i, (ng, sg)) in self.n_groups.iter().zip(&self.slack_groups).enumerate() {
            let n = a.n[i].min(ng.upper);
            for (&b, v) in ng.bits.iter().zip(ng.represent(n).unwrap()) {
                bits[b] = v;
            }
            let load: f64 = self.arc_terms[i].iter().filter(|&&(x, _)| a.x[x]).map(|&(_, l)| l).sum();
            let slack = ((n as f64 * w - load) / u).round().clamp(0.0, sg.upper as f64) as u64;
            for (&b, v) in sg.bits.iter().zip(sg.represent(slack).unwrap()) {
                bits[b] = v;
            }
        }
        bits
    }
}

/// Smallest power-of-ten scaling making every load and the capacity integral,
/// then their gcd; coarsened so an arc's slack fits [`MAX_SLACK_BITS`] bits.
pub fn default_slack_unit(m: &MipModel) -> f64 {
    let w = m.vehicle_capacity;
    let values: Vec<f64> = m.commodities.iter().map(|c| c.load).chain([w]).collect();
    let coarse = w / (1u64 << MAX_SLACK_BITS) as f64;
    let Some(scale) = (0..=9).map(|s| 10f64.powi(s)).find(|&s| {
        values.iter().all(|&v| {
            let scaled = v * s;
            (scaled - scaled.round()).abs() <= 1e-9 * scaled.abs().max(1.0) && scaled.round() < 9e15
        })
    }) else {
        return coarse;
    };
    let g = values.iter().map(|&v| (v * scale).round() as u64).fold(0, gcd);
    let unit = g as f64 / scale;
    if w / unit > (1u64 << MAX_SLACK_BITS) as f64 {
        coarse
    } else {
        unit
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Accumulates upper-triangular coefficients.
#[derive(Default)]
struct Builder {
    terms: HashMap<(usize, usize), f64>,
    offset: f64,
}

impl Builder {
    fn add(&mut self, p: usize, q: usize, c: f64) {
        let key = if p <= q { (p, q) } else { (q, p) };
        *self.terms.entry(key).or_default() += c;
    }

    /// `weight * (sum a_t b_t + constant)^2` using `b^2 = b`.
    fn add_square(&mut self, weight: f64, terms: &[(usize, f64)], constant: f64) {
        for (i, &(p, a)) in terms.iter().enumerate() {
            self.add(p, p, weight * (a * a + 2.0 * a * constant));
            for &(q, b) in &terms[i + 1..] {
                self.add(p, q, weight * 2.0 * a * b);
            }
        }
        self.offset += weight * constant * constant;
    }

    fn finish(self) -> (BTreeMap<(usize, usize), f64>, f64) {
        let terms = self.terms.into_iter().filter(|&(_, c)| c != 0.0).collect();
        (terms, self.offset)
    }
}

/// Penalised quadratic model of `m`:
/// objective over vehicle bits, plus `flow_penalty * sum (unit residual)^2`
/// over flow rows, plus `capacity_penalty * sum (load/u - N W/u + s)^2` over
/// arcs with `N` and slack `s` binary-expanded.
pub fn encode_qubo(m: &MipModel, cfg: &PenaltyConfig) -> Result<Qubo, EncodeError> {
    for (name, v) in
        [("flow_penalty", cfg.flow_penalty), ("capacity_penalty", cfg.capacity_penalty), ("slack_unit", cfg.slack_unit)]
    {
        if !(v.is_finite() && v > 0.0) {
            return Err(EncodeError::InvalidPenalty { name, value: v });
        }
    }
    let u = cfg.slack_unit;
    let w = m.vehicle_capacity;
    let num_x = m.x_vars.len();
    let mut varmap: Vec<QuboVar> = (0..num_x).map(|x| QuboVar::X { x }).collect();
    let mut n_groups = Vec::with_capacity(m.n_vars.len());
    let mut slack_groups = Vec::with_capacity(m.n_vars.len());
    let slack_upper = {
        let ratio = (w / u - 1e-9).ceil();
        if ratio >= 1.0 {
            ratio as u64 - 1
        } else {
            0
        }
    };
    for (i, v) in m.n_vars.iter().enumerate() {
        let ng = binary_expand(v.upper).offset(varmap.len());
        varmap.extend(ng.weights.iter().map(|&weight| QuboVar::NBit { n_var: i, weight }));
        let sg = binary_expand(slack_upper).offset(varmap.len());
        varmap.extend(sg.weights.iter().map(|&weight| QuboVar::SlackBit { n_var: i, weight }));
        n_groups.push(ng);
        slack_groups.push(sg);
    }

    let mut b = Builder::default();
    for (ng, &cost) in n_groups.iter().zip(&m.objective) {
        for (&bit, &wt) in ng.bits.iter().zip(&ng.weights) {
            b.add(bit, bit, cost * wt as f64);
        }
    }
    for fc in &m.flow_constraints {
        let terms: Vec<(usize, f64)> = fc.terms.iter().map(|&(x, c)| (x, c as f64)).collect();
        b.add_square(cfg.flow_penalty, &terms, -(fc.rhs as f64));
    }
    for (cc, (ng, sg)) in m.capacity_constraints.iter().zip(n_groups.iter().zip(&slack_groups)) {
        let mut terms: Vec<(usize, f64)> = cc.terms.iter().map(|&(x, l)| (x, l / u)).collect();
        terms.extend(ng.bits.iter().zip(&ng.weights).map(|(&bit, &wt)| (bit, -(wt as f64) * w / u)));
        terms.extend(sg.bits.iter().zip(&sg.weights).map(|(&bit, &wt)| (bit, wt as f64)));
        b.add_square(cfg.capacity_penalty, &terms, 0.0);
    }
    let (terms, offset) = b.finish();

    let mut warnings = Vec::new();
    let costliest = m
        .commodities
        .iter()
        .flat_map(|c| {
            c.paths
                .iter()
                .map(move |p| p.n.iter().map(|&n| m.objective[n]).sum::<f64>() * vehicles_needed(c.load, w) as f64)
        })
        .fold(0.0, f64::max);
    if cfg.flow_penalty < 2.0 * costliest {
        warnings.push(EncodeWarning::PenaltyTooSmall { flow_penalty: cfg.flow_penalty, safety_bound: 2.0 * costliest });
    }
    let integral = |v: f64| {
        let r = v / u;
        (r - r.round()).abs() <= 1e-9 * r.abs().max(1.0)
    };
    if !m.commodities.iter().all(|c| integral(c.load)) || !integral(w) {
        warnings.push(EncodeWarning::InexactSlack { slack_unit: u });
    }

    Ok(Qubo {
        size: varmap.len(),
        terms,
        offset,
        varmap,
        n_groups,
        slack_groups,
        penalties: *cfg,
        warnings,
        num_x,
        vehicle_capacity: w,
        arc_terms: m.capacity_constraints.iter().map(|c| c.terms.clone()).collect(),
    })
}

/// `sum_{p<=q} Q_pq b_p b_q + offset`.
pub fn qubo_energy(q: &Qubo, bits: &[bool]) -> Result<f64, EncodeError> {
    if bits.len() != q.size {
        return Err(EncodeError::SizeMismatch { expected: q.size, got: bits.len() });
    }
    Ok(q.terms.iter().filter(|(&(p, r), _)| bits[p] && bits[r]).map(|(_, &c)| c).sum::<f64>() + q.offset)
}

/// Reads route bits directly and vehicle counts through their bit groups.
/// With `repair`, vehicle counts are replaced by the fewest that carry the
/// routed load; flow violations are left as they are.
pub fn decode(q: &Qubo, bits: &[bool], repair: bool) -> Result<Assignment, EncodeError> {
    if bits.len() != q.size {
        return Err(EncodeError::SizeMismatch { expected: q.size, got: bits.len() });
    }
    let x = bits[..q.num_x].to_vec();
    let n = if repair {
        q.arc_terms
            .iter()
            .map(|t| {
                let load: f64 = t.iter().filter(|&&(xi, _)| x[xi]).map(|&(_, l)| l).sum();
                vehicles_needed(load, q.vehicle_capacity)
            })
            .collect()
    } else {
        q.n_groups.iter().map(|g| g.decode(bits)).collect()
    };
    Ok(Assignment { x, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{t1, t1_with_tat};
    use crate::instance::Instance;
    use crate::model::{build_mip, check_feasibility, objective_value};
    use crate::preprocess::{build_restriction_matrix, restrict, RestrictionPolicy};

    fn model_for(inst: &Instance) -> MipModel {
        let rm = build_restriction_matrix(inst, RestrictionPolicy::All);
        build_mip(inst, &restrict(inst, &rm, 2).unwrap()).unwrap()
    }

    fn all_bits(size: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1u64 << size).map(move |m| (0..size).map(|i| m >> i & 1 == 1).collect())
    }

    #[test]
    fn t1_tat11_layout() {
        let m = model_for(&t1_with_tat(11.0));
        let cfg = PenaltyConfig { flow_penalty: 100.0, ..PenaltyConfig::for_model(&m) };
        assert_eq!(cfg.slack_unit, 5.0);
        let q = encode_qubo(&m, &cfg).unwrap();
        // x_13, one vehicle bit, two slack bits (slack in 0..=2 units of 5)
        assert_eq!(q.size, 4);
        assert_eq!(
            q.varmap,
            vec![
                QuboVar::X { x: 0 },
                QuboVar::NBit { n_var: 0, weight: 1 },
                QuboVar::SlackBit { n_var: 0, weight: 1 },
                QuboVar::SlackBit { n_var: 0, weight: 1 },
            ]
        );
        assert_eq!(qubo_energy(&q, &[false; 4]).unwrap(), 200.0);
        // x=1, N=1, slack = (15 - 10) / 5 = 1
        assert_eq!(qubo_energy(&q, &[true, true, true, false]).unwrap(), 10.0);
        assert!(q.warnings.is_empty());
    }

    #[test]
    fn t1_ground_state_is_direct_route() {
        let m = model_for(&t1_with_tat(12.0));
        let q = encode_qubo(&m, &PenaltyConfig::for_model(&m)).unwrap();
        let (best, e) = all_bits(q.size)
            .map(|b| {
                let e = qubo_energy(&q, &b).unwrap();
                (b, e)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(e, 10.0);
        let a = decode(&q, &best, false).unwrap();
        assert!(check_feasibility(&m, &a).unwrap().feasible);
        assert_eq!(objective_value(&m, &a).unwrap(), 10.0);
    }

    #[test]
    fn empty_model() {
        let mut inst = t1();
        inst.commodities.clear();
        let m = model_for(&inst);
        let q = encode_qubo(&m, &PenaltyConfig::for_model(&m)).unwrap();
        assert_eq!((q.size, q.offset), (0, 0.0));
        assert!(q.terms.is_empty());
    }

    #[test]
    fn energy_examples() {
        let q = Qubo::from_terms(1, [((0, 0), 1.0)].into(), 0.0);
        assert_eq!(qubo_energy(&q, &[false]).unwrap(), 0.0);
        assert_eq!(qubo_energy(&q, &[true]).unwrap(), 1.0);
        let q = Qubo::from_terms(2, [((0, 1), 2.0)].into(), 0.0);
        assert_eq!(qubo_energy(&q, &[true, true]).unwrap(), 2.0);
        assert_eq!(qubo_energy(&q, &[true, false]).unwrap(), 0.0);
        assert!(matches!(qubo_energy(&q, &[true]), Err(EncodeError::SizeMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn decode_examples() {
        let m = model_for(&t1_with_tat(11.0));
        let q = encode_qubo(&m, &PenaltyConfig::for_model(&m)).unwrap();
        let a = decode(&q, &[true, true, true, false], false).unwrap();
        assert_eq!(a, Assignment { x: vec![true], n: vec![1] });
        let a = decode(&q, &[true, false, false, false], true).unwrap();
        assert_eq!(a.n, vec![1]);
        let a = decode(&q, &[false; 4], true).unwrap();
        assert_eq!(a, Assignment { x: vec![false], n: vec![0] });
        assert!(decode(&q, &[true], true).is_err());
    }

    #[test]
    fn bit_image_round_trip() {
        let m = model_for(&t1_with_tat(12.0));
        let q = encode_qubo(&m, &PenaltyConfig::for_model(&m)).unwrap();
        let a = m.routing_assignment(&crate::model::Routing(vec![1]));
        let bits = q.bits_for(&a);
        assert_eq!(decode(&q, &bits, false).unwrap(), a);
        assert_eq!(qubo_energy(&q, &bits).unwrap(), objective_value(&m, &a).unwrap());
    }

    #[test]
    fn small_penalty_warns() {
        let m = model_for(&t1_with_tat(12.0));
        let cfg = PenaltyConfig { flow_penalty: 5.0, ..PenaltyConfig::for_model(&m) };
        let q = encode_qubo(&m, &cfg).unwrap();
        assert!(matches!(q.warnings[0], EncodeWarning::PenaltyTooSmall { .. }));
        let bad = PenaltyConfig { capacity_penalty: 0.0, ..cfg };
        assert!(encode_qubo(&m, &bad).is_err());
    }

    #[test]
    fn slack_unit_selection() {
        let mut m = model_for(&t1_with_tat(12.0));
        assert_eq!(default_slack_unit(&m), 5.0);
        m.commodities[0].load = 2.5;
        assert_eq!(default_slack_unit(&m), 2.5);
        m.commodities[0].load = 0.3;
        m.vehicle_capacity = 15.0;
        assert!((default_slack_unit(&m) - 0.3).abs() < 1e-12);
        // 15 / 0.001 needs more than 12 bits of slack
        m.commodities[0].load = 0.001;
        assert_eq!(default_slack_unit(&m), 15.0 / 4096.0);
    }
}
