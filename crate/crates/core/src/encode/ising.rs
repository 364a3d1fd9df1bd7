use std::collections::BTreeMap;

use super::qubo::Qubo;
use super::EncodeError;

/// Spin model `sum h_p s_p + sum_{p<q} J_pq s_p s_q + offset`, `s in {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ising {
    pub h: Vec<f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

/// Substitutes `b = (1 + s) / 2`: diagonal entries feed the biases, cross
/// terms feed the couplings and both biases of their pair.
pub fn qubo_to_ising(q: &Qubo) -> Ising {
    let mut h = vec![0.0; q.size];
    let mut j = BTreeMap::new();
    let mut offset = q.offset;
    for (&(p, r), &c) in &q.terms {
        if p == r {
            h[p] += c / 2.0;
            offset += c / 2.0;
        } else {
            let quarter = c / 4.0;
            j.insert((p, r), quarter);
            h[p] += quarter;
            h[r] += quarter;
            offset += quarter;
        }
    }
    Ising { h, j, offset }
}

pub fn ising_energy(model: &Ising, spins: &[i8]) -> Result<f64, EncodeError> {
    if spins.len() != model.h.len() {
        return Err(EncodeError::SizeMismatch { expected: model.h.len(), got: spins.len() });
    }
    let s = |i: usize| spins[i] as f64;
    let linear: f64 = model.h.iter().enumerate().map(|(i, &h)| h * s(i)).sum();
    let coupling: f64 = model.j.iter().map(|(&(p, q), &c)| c * s(p) * s(q)).sum();
    Ok(linear + coupling + model.offset)
}
