//! Single-bit-flip Metropolis annealing over a QUBO.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SolveError;
use crate::encode::{qubo_energy, Qubo};

pub const DEFAULT_SWEEPS: usize = 2000;
const BETA_PROBE_STATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub restarts: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
}

impl AnnealSchedule {
    pub fn new(sweeps: usize, restarts: usize, beta_start: f64, beta_end: f64, seed: u64) -> Result<Self, SolveError> {
        if sweeps == 0 || restarts == 0 {
            return Err(SolveError::InvalidSchedule("sweeps and restarts must be at least 1".into()));
        }
        if !(beta_start > 0.0 && beta_start < beta_end && beta_end.is_finite()) {
            return Err(SolveError::InvalidSchedule(format!(
                "need 0 < beta_start < beta_end, got {beta_start} and {beta_end}"
            )));
        }
        Ok(AnnealSchedule { sweeps, restarts, beta_start, beta_end, seed })
    }

    /// Default sweeps and restarts with a temperature range scaled to the
    /// model: `ln 2 / dE_max` to `ln 100 / dE_min` over single-flip deltas
    /// seen at random states.
    pub fn auto(q: &Qubo, seed: u64) -> Self {
        let (beta_start, beta_end) = estimate_beta_range(q, seed);
        AnnealSchedule { sweeps: DEFAULT_SWEEPS, restarts: (q.size / 64).max(8), beta_start, beta_end, seed }
    }

    pub fn with_sweeps(self, sweeps: usize) -> Self {
        AnnealSchedule { sweeps, ..self }
    }

    pub fn with_restarts(self, restarts: usize) -> Self {
        AnnealSchedule { restarts, ..self }
    }

    /// Inverse temperature at `sweep`, geometric from start to end.
    pub fn beta(&self, sweep: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.beta_start;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(t)
    }
}

fn estimate_beta_range(q: &Qubo, seed: u64) -> (f64, f64) {
    let sampler = Sampler::new(q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let (mut max_d, mut min_d) = (0.0f64, f64::INFINITY);
    let mut bits = vec![false; q.size];
    for _ in 0..BETA_PROBE_STATES {
        bits.iter_mut().for_each(|b| *b = rng.gen());
        let field = sampler.fields(&bits);
        for (p, &f) in field.iter().enumerate() {
            let d = sampler.flip_delta(bits[p], f).abs();
            if d > 0.0 {
                max_d = max_d.max(d);
                min_d = min_d.min(d);
            }
        }
    }
    if max_d == 0.0 {
        return (0.1, 10.0);
    }
    (std::f64::consts::LN_2 / max_d, 100f64.ln() / min_d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub energy: f64,
    pub restart: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub best: usize,
}

impl SampleSet {
    fn from_samples(samples: Vec<Sample>) -> Self {
        let mut best = 0;
        for (i, s) in samples.iter().enumerate() {
            if s.energy < samples[best].energy {
                best = i;
            }
        }
        SampleSet { samples, best }
    }

    pub fn best_sample(&self) -> &Sample {
        &self.samples[self.best]
    }
}

/// Runs `sched.restarts` independent anneals, each from a random state drawn
/// from the stream `(seed, restart)`. Every restart contributes its final
/// state followed by the lowest-energy state it visited at a sweep boundary.
pub fn simulated_anneal(q: &Qubo, sched: &AnnealSchedule) -> SampleSet {
    let sampler = Sampler::new(q);
    let mut samples = Vec::with_capacity(2 * sched.restarts);
    for r in 0..sched.restarts {
        let out = sampler.run(sched, r, None, None);
        samples.extend(out.into_samples(q, r));
    }
    SampleSet::from_samples(samples)
}

pub(crate) struct RestartOutcome {
    pub final_bits: Vec<bool>,
    pub best_bits: Vec<bool>,
    /// False when the deadline cut the restart short.
    pub completed: bool,
}

impl RestartOutcome {
    pub fn into_samples(self, q: &Qubo, restart: usize) -> [Sample; 2] {
        let energy = |b: &[bool]| qubo_energy(q, b).expect("sampler keeps the model size");
        [
            Sample { energy: energy(&self.final_bits), bits: self.final_bits, restart },
            Sample { energy: energy(&self.best_bits), bits: self.best_bits, restart },
        ]
    }
}

/// Compressed adjacency of the QUBO for O(degree) flip updates.
pub(crate) struct Sampler {
    linear: Vec<f64>,
    start: Vec<usize>,
    neighbours: Vec<(usize, f64)>,
    offset: f64,
}

impl Sampler {
    pub fn new(q: &Qubo) -> Self {
        let n = q.size;
        let mut linear = vec![0.0; n];
        let mut degree = vec![0usize; n];
        for (&(p, r), &c) in &q.terms {
            if p == r {
                linear[p] += c;
            } else {
                degree[p] += 1;
                degree[r] += 1;
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + degree[i];
        }
        let mut fill = start.clone();
        let mut neighbours = vec![(0, 0.0); start[n]];
        for (&(p, r), &c) in &q.terms {
            if p != r {
                neighbours[fill[p]] = (r, c);
                fill[p] += 1;
                neighbours[fill[r]] = (p, c);
                fill[r] += 1;
            }
        }
        Sampler { linear, start, neighbours, offset: q.offset }
    }

    fn size(&self) -> usize {
        self.linear.len()
    }

    /// `f_p = Q_pp + sum_q Q_pq b_q`: the energy change of raising bit p.
    fn fields(&self, bits: &[bool]) -> Vec<f64> {
        (0..self.size())
            .map(|p| {
                self.linear[p]
                    + self.neighbours[self.start[p]..self.start[p + 1]]
                        .iter()
                        .filter(|&&(q, _)| bits[q])
                        .map(|&(_, c)| c)
                        .sum::<f64>()
            })
            .collect()
    }

    fn flip_delta(&self, bit: bool, field: f64) -> f64 {
        if bit {
            -field
        } else {
            field
        }
    }

    fn energy(&self, bits: &[bool], fields: &[f64]) -> f64 {
        // sum over set bits of (linear + field) / 2 counts every pair once.
        let mut e = self.offset;
        for p in 0..self.size() {
            if bits[p] {
                e += 0.5 * (self.linear[p] + fields[p]);
            }
        }
        e
    }

    pub fn run(
        &self,
        sched: &AnnealSchedule,
        restart: usize,
        init: Option<&[bool]>,
        deadline: Option<Instant>,
    ) -> RestartOutcome {
        let n = self.size();
        let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
        rng.set_stream(restart as u64);
        let mut bits: Vec<bool> = match init {
            Some(b) => b.to_vec(),
            None => (0..n).map(|_| rng.gen()).collect(),
        };
        let mut field = self.fields(&bits);
        let mut energy = self.energy(&bits, &field);
        let mut best_energy = energy;
        let mut best_bits = bits.clone();
        let mut order: Vec<usize> = (0..n).collect();
        let mut completed = true;

        for sweep in 0..sched.sweeps {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                completed = false;
                break;
            }
            let beta = sched.beta(sweep);
            order.shuffle(&mut rng);
            for &p in &order {
                let delta = self.flip_delta(bits[p], field[p]);
                let accept = delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp();
                if !accept {
                    continue;
                }
                let step = if bits[p] { -1.0 } else { 1.0 };
                bits[p] = !bits[p];
                energy += delta;
                for &(q, c) in &self.neighbours[self.start[p]..self.start[p + 1]] {
                    field[q] += step * c;
                }
            }
            if energy < best_energy {
                best_energy = energy;
                best_bits.copy_from_slice(&bits);
            }
        }
        RestartOutcome { final_bits: bits, best_bits, completed }
    }
}
