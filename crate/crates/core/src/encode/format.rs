//! Plain-text QUBO files.
//!
//! ```text
//! c <free comment>
//! p qubo 0 <maxDiagonals> <nDiagonals> <nElements>
//! <p> <p> <coefficient>      diagonal entries first
//! <p> <q> <coefficient>      then couplers, p < q
//! c offset <value>
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use super::qubo::{Qubo, QuboVar};
use super::EncodeError;
use crate::model::MipModel;

pub fn write_qubo(q: &Qubo) -> String {
    let diagonal: Vec<_> = q.terms.iter().filter(|(&(p, r), _)| p == r).collect();
    let couplers: Vec<_> = q.terms.iter().filter(|(&(p, r), _)| p != r).collect();
    let mut out = String::new();
    writeln!(out, "c mcnf penalised routing model").unwrap();
    writeln!(out, "p qubo 0 {} {} {}", q.size, diagonal.len(), couplers.len()).unwrap();
    for (&(p, r), c) in diagonal.into_iter().chain(couplers) {
        writeln!(out, "{p} {r} {c}").unwrap();
    }
    writeln!(out, "c offset {}", q.offset).unwrap();
    out
}

/// Matrix content of a QUBO file.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboFile {
    pub size: usize,
    pub terms: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl QuboFile {
    pub fn into_qubo(self) -> Qubo {
        Qubo::from_terms(self.size, self.terms, self.offset)
    }
}

pub fn read_qubo(text: &str) -> Result<QuboFile, EncodeError> {
    let err = |line: usize, msg: &str| EncodeError::Format { line, message: msg.to_string() };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut terms = BTreeMap::new();
    let mut offset = 0.0;
    let (mut n_diag, mut n_off) = (0, 0);
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut words = rest.split_whitespace();
            if words.next() == Some("offset") {
                offset = words.next().and_then(|v| v.parse().ok()).ok_or_else(|| err(line_no, "bad offset comment"))?;
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.first() == Some(&"p") {
            if header.is_some() {
                return Err(err(line_no, "duplicate header"));
            }
            if fields.len() != 6 || fields[1] != "qubo" || fields[2] != "0" {
                return Err(err(line_no, "expected `p qubo 0 <maxDiagonals> <nDiagonals> <nElements>`"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(line_no, "header counts must be integers"));
            header = Some((num(fields[3])?, num(fields[4])?, num(fields[5])?));
            continue;
        }
        let Some((size, _, _)) = header else {
            return Err(err(line_no, "term before header"));
        };
        if fields.len() != 3 {
            return Err(err(line_no, "expected `<p> <q> <coefficient>`"));
        }
        let p: usize = fields[0].parse().map_err(|_| err(line_no, "bad index"))?;
        let q: usize = fields[1].parse().map_err(|_| err(line_no, "bad index"))?;
        let c: f64 = fields[2].parse().map_err(|_| err(line_no, "bad coefficient"))?;
        if p > q || q >= size {
            return Err(err(line_no, "indices must satisfy p <= q < maxDiagonals"));
        }
        if terms.insert((p, q), c).is_some() {
            return Err(err(line_no, "duplicate entry"));
        }
        if p == q {
            n_diag += 1;
        } else {
            n_off += 1;
        }
    }
    let (size, want_diag, want_off) = header.ok_or_else(|| err(0, "missing header"))?;
    if (n_diag, n_off) != (want_diag, want_off) {
        return Err(err(0, "term counts disagree with header"));
    }
    Ok(QuboFile { size, terms, offset })
}

/// Variable map as JSON: one entry per QUBO bit, in bit order.
pub fn varmap_json(q: &Qubo, m: &MipModel) -> serde_json::Value {
    let name_of = |k| m.commodities.iter().find(|c| c.id == k).map(|c| c.name.clone()).unwrap_or_default();
    let entries: Vec<serde_json::Value> = q
        .varmap
        .iter()
        .enumerate()
        .map(|(bit, v)| match *v {
            QuboVar::X { x } => {
                let xv = &m.x_vars[x];
                serde_json::json!({"bit": bit, "kind": "x", "key": m.x_key(xv, &name_of(xv.commodity))})
            }
            QuboVar::NBit { n_var, weight } => {
                serde_json::json!({"bit": bit, "kind": "n_bit", "key": m.n_key(&m.n_vars[n_var]), "weight": weight})
            }
            QuboVar::SlackBit { n_var, weight } => {
                serde_json::json!({"bit": bit, "kind": "slack_bit", "key": m.n_key(&m.n_vars[n_var]), "weight": weight})
            }
        })
        .collect();
    serde_json::json!({
        "size": q.size,
        "offset": q.offset,
        "slack_unit": q.penalties.slack_unit,
        "flow_penalty": q.penalties.flow_penalty,
        "capacity_penalty": q.penalties.capacity_penalty,
        "variables": entries,
    })
}
