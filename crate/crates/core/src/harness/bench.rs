//! Solver matchups over generated instances.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::generate::{generate_instance, sized_config, GeneratorConfig};
use super::HarnessError;
use crate::encode::{encode_qubo, PenaltyConfig, Qubo};
use crate::model::{build_mip, model_stats, MipModel};
use crate::preprocess::{build_restriction_matrix, restrict, RestrictionPolicy};
use crate::solve::{
    anneal_solve, exact_solve_model, greedy_solve, hybrid_solve, AnnealSchedule, ExactOptions, SolveResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Hybrid,
    Exact,
    Greedy,
    Anneal,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Hybrid => "hybrid",
            SolverKind::Exact => "exact",
            SolverKind::Greedy => "greedy",
            SolverKind::Anneal => "anneal",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hybrid" => Ok(SolverKind::Hybrid),
            "exact" => Ok(SolverKind::Exact),
            "greedy" => Ok(SolverKind::Greedy),
            "anneal" => Ok(SolverKind::Anneal),
            _ => Err(format!("unknown solver `{s}` (expected hybrid, exact, greedy or anneal)")),
        }
    }
}

fn yes() -> bool {
    true
}

/// One solver with its budget. Unset fields take solver defaults; the time
/// limit applies to the hybrid and exact solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweeps: Option<usize>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub node_limit: Option<u64>,
    /// Vehicle repair when decoding plain annealing samples.
    #[serde(default = "yes")]
    pub repair: bool,
}

impl SolverConfig {
    pub fn new(kind: SolverKind) -> Self {
        SolverConfig { kind, seed: 0, sweeps: None, restarts: None, time_limit_s: None, node_limit: None, repair: true }
    }

    pub fn time_limit(&self) -> Result<Option<Duration>, HarnessError> {
        self.time_limit_s
            .map(|s| {
                Duration::try_from_secs_f64(s)
                    .map_err(|_| HarnessError::InvalidConfig(format!("time limit {s} is not a nonnegative duration")))
            })
            .transpose()
    }

    pub fn schedule(&self, q: &Qubo) -> Result<AnnealSchedule, HarnessError> {
        let auto = AnnealSchedule::auto(q, self.seed);
        Ok(AnnealSchedule::new(
            self.sweeps.unwrap_or(auto.sweeps),
            self.restarts.unwrap_or(auto.restarts),
            auto.beta_start,
            auto.beta_end,
            self.seed,
        )?)
    }
}

/// Runs one configured solver on a built model. Annealing solvers encode the
/// model with default penalties first.
pub fn run_solver(m: &MipModel, cfg: &SolverConfig) -> Result<SolveResult, HarnessError> {
    let limit = cfg.time_limit()?;
    Ok(match cfg.kind {
        SolverKind::Greedy => greedy_solve(m)?,
        SolverKind::Exact => exact_solve_model(
            m,
            ExactOptions {
                node_limit: cfg.node_limit.unwrap_or(ExactOptions::default().node_limit),
                time_limit: limit,
            },
        ),
        SolverKind::Hybrid | SolverKind::Anneal => {
            let q = encode_qubo(m, &PenaltyConfig::for_model(m))?;
            let sched = cfg.schedule(&q)?;
            if cfg.kind == SolverKind::Hybrid {
                hybrid_solve(m, &q, &sched, limit.unwrap_or(Duration::MAX))?
            } else {
                anneal_solve(m, &q, &sched, cfg.repair)?
            }
        }
    })
}

/// One row of a benchmark report. Failed runs carry no objective or gap and
/// describe the failure in `status`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub num_variables: usize,
    pub num_constraints: usize,
    pub solver_name: String,
    pub objective: Option<f64>,
    /// Seconds spent inside the solver call.
    pub wall_time: f64,
    pub gap: Option<f64>,
    pub instance_seed: u64,
    pub feasible: bool,
    pub status: String,
}

/// Benchmark description read by the `bench` command.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub instances: Vec<SuiteEntry>,
    #[serde(default = "all_policy")]
    pub policy: RestrictionPolicy,
    #[serde(default)]
    pub solvers: Vec<SolverConfig>,
}

fn all_policy() -> RestrictionPolicy {
    RestrictionPolicy::All
}

/// Either an explicit generator configuration or a variable-count target
/// resolved with [`sized_config`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SuiteEntry {
    Config(GeneratorConfig),
    Target { target_variables: usize, seed: u64 },
}

impl BenchSuite {
    pub fn resolve(&self) -> Result<Vec<GeneratorConfig>, HarnessError> {
        self.instances
            .iter()
            .map(|e| match e {
                SuiteEntry::Config(c) => Ok(c.clone()),
                SuiteEntry::Target { target_variables, seed } => {
                    let template = GeneratorConfig::new(2, 1.0, 1.0, *seed);
                    sized_config(&template, *target_variables).map(|(c, _)| c)
                }
            })
            .collect()
    }
}

/// Every solver on every generated instance, in suite order then solver
/// order. Per-instance and per-solver failures become annotated records.
pub fn run_benchmark(
    suite: &[GeneratorConfig],
    solvers: &[SolverConfig],
    policy: RestrictionPolicy,
) -> Result<Vec<BenchRecord>, HarnessError> {
    if suite.is_empty() {
        return Err(HarnessError::InvalidSuite("no instances".into()));
    }
    if solvers.is_empty() {
        return Err(HarnessError::InvalidSuite("no solvers".into()));
    }
    let mut records = Vec::with_capacity(suite.len() * solvers.len());
    for cfg in suite {
        let failed = |size: (usize, usize), s: &SolverConfig, e: &HarnessError| BenchRecord {
            num_variables: size.0,
            num_constraints: size.1,
            solver_name: s.kind.as_str().to_string(),
            objective: None,
            wall_time: 0.0,
            gap: None,
            instance_seed: cfg.seed,
            feasible: false,
            status: format!("error: {e}"),
        };
        let model = generate_instance(cfg).and_then(|inst| {
            let pre = restrict(&inst, &build_restriction_matrix(&inst, policy), cfg.max_hops)?;
            Ok(build_mip(&inst, &pre)?)
        });
        let m = match model {
            Ok(m) => m,
            Err(e) => {
                records.extend(solvers.iter().map(|s| failed((0, 0), s, &e)));
                continue;
            }
        };
        let stats = model_stats(&m);
        let size = (stats.num_variables, stats.num_constraints);
        for s in solvers {
            records.push(match run_solver(&m, s) {
                Ok(r) => BenchRecord {
                    num_variables: size.0,
                    num_constraints: size.1,
                    solver_name: r.solver_name,
                    objective: Some(r.objective),
                    wall_time: r.wall_time,
                    gap: Some(r.gap),
                    instance_seed: cfg.seed,
                    feasible: r.feasible,
                    status: r.status.as_str().to_string(),
                },
                Err(e) => failed(size, s, &e),
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GeneratorConfig {
        GeneratorConfig::new(4, 0.4, 0.5, 5)
    }

    fn solvers() -> Vec<SolverConfig> {
        vec![
            SolverConfig::new(SolverKind::Exact),
            SolverConfig { seed: 9, sweeps: Some(300), ..SolverConfig::new(SolverKind::Hybrid) },
        ]
    }

    #[test]
    fn exact_bounds_hybrid() {
        let recs = run_benchmark(&[tiny()], &solvers(), RestrictionPolicy::All).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].num_variables, recs[1].num_variables);
        assert_eq!(recs[0].status, "optimal");
        assert!(recs[1].objective.unwrap() >= recs[0].objective.unwrap());
        let again = run_benchmark(&[tiny()], &solvers(), RestrictionPolicy::All).unwrap();
        for (a, b) in recs.iter().zip(&again) {
            assert_eq!(a.objective, b.objective);
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(run_benchmark(&[tiny()], &[], RestrictionPolicy::All), Err(HarnessError::InvalidSuite(_))));
        assert!(matches!(run_benchmark(&[], &solvers(), RestrictionPolicy::All), Err(HarnessError::InvalidSuite(_))));
    }

    #[test]
    fn failures_become_records() {
        let bad = GeneratorConfig { num_nodes: 1, ..tiny() };
        let recs = run_benchmark(&[bad, tiny()], &solvers(), RestrictionPolicy::All).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs[0].status.starts_with("error: "));
        assert_eq!(recs[0].objective, None);
        assert!(recs[2].feasible);
    }

    #[test]
    fn bad_solver_budget_is_recorded() {
        let s = SolverConfig { time_limit_s: Some(-1.0), ..SolverConfig::new(SolverKind::Exact) };
        let recs = run_benchmark(&[tiny()], &[s], RestrictionPolicy::All).unwrap();
        assert!(recs[0].status.contains("time limit"));
    }

    #[test]
    fn suite_document() {
        let doc = r#"{"instances": [{"target_variables": 100, "seed": 1},
            {"num_nodes": 4, "arc_density": 0.5, "load_range": [1, 5], "tat_slack": 1.2,
             "commodity_fraction": 0.5, "seed": 2}],
            "solvers": [{"kind": "greedy"}]}"#;
        let suite: BenchSuite = serde_json::from_str(doc).unwrap();
        assert_eq!(suite.policy, RestrictionPolicy::All);
        let cfgs = suite.resolve().unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[1].num_nodes, 4);
        assert!(serde_json::from_str::<BenchSuite>(r#"{"instances": [], "extra": 1}"#).is_err());
    }
}
