//! Arc-load bookkeeping for path-based moves.

use crate::model::{vehicles_needed, MipModel, Routing};

/// Loads per arc under a routing, with the vehicle cost they imply.
pub(crate) struct LoadState<'m> {
    m: &'m MipModel,
    pub loads: Vec<f64>,
}

impl<'m> LoadState<'m> {
    pub fn empty(m: &'m MipModel) -> Self {
        LoadState { m, loads: vec![0.0; m.n_vars.len()] }
    }

    pub fn of(m: &'m MipModel, routing: &Routing) -> Self {
        let mut s = Self::empty(m);
        for (c, &p) in routing.0.iter().enumerate() {
            s.add(c, p, 1.0);
        }
        s
    }

    pub fn add(&mut self, commodity: usize, path: usize, sign: f64) {
        let c = &self.m.commodities[commodity];
        for &a in &c.paths[path].n {
            self.loads[a] += sign * c.load;
        }
    }

    fn vehicles(&self, load: f64) -> f64 {
        vehicles_needed(load, self.m.vehicle_capacity) as f64
    }

    /// Extra vehicle cost of routing `commodity` along `path` on top of the
    /// current loads.
    pub fn marginal(&self, commodity: usize, path: usize) -> f64 {
        let c = &self.m.commodities[commodity];
        c.paths[path]
            .n
            .iter()
            .map(|&a| {
                let l = self.loads[a];
                self.m.objective[a] * (self.vehicles(l + c.load) - self.vehicles(l))
            })
            .sum()
    }

    pub fn cost(&self) -> f64 {
        self.loads.iter().zip(&self.m.objective).map(|(&l, &c)| c * self.vehicles(l)).sum()
    }
}

/// Cost of a complete routing.
pub fn routing_cost(m: &MipModel, routing: &Routing) -> f64 {
    LoadState::of(m, routing).cost()
}

/// Re-routes one commodity at a time onto its cheapest path given all the
/// others, until a full pass changes nothing or `keep_going` says stop.
pub(crate) fn polish(m: &MipModel, routing: &mut Routing, mut keep_going: impl FnMut() -> bool) {
    let mut state = LoadState::of(m, routing);
    loop {
        let mut improved = false;
        for c in 0..m.commodities.len() {
            if !keep_going() {
                return;
            }
            let current = routing.0[c];
            state.add(c, current, -1.0);
            let mut best = (state.marginal(c, current), current);
            for p in 0..m.commodities[c].paths.len() {
                let d = state.marginal(c, p);
                if d < best.0 - 1e-9 * best.0.abs().max(1.0) {
                    best = (d, p);
                }
            }
            state.add(c, best.1, 1.0);
            if best.1 != current {
                routing.0[c] = best.1;
                improved = true;
            }
        }
        if !improved {
            return;
        }
    }
}
