//! The `mcnf` command line.
//!
//! Exit status is 0 on success, 2 for unusable input and 3 when a solver
//! returns no feasible routing.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{
    emit_report_with, generate_instance, run_benchmark, run_solver, BenchSuite, GeneratorConfig, ReportFormat,
    ReportOptions, SolverConfig, SolverKind,
};
use crate::encode::{encode_qubo, varmap_json, write_qubo, PenaltyConfig};
use crate::instance::{load_instance, to_document, validate_instance, Instance};
use crate::model::{build_mip, check_feasibility, model_stats, objective_value, MipModel};
use crate::preprocess::{build_restriction_matrix, paths_to_json, restrict, PreprocessedInstance, RestrictionPolicy};

#[derive(Debug, Parser)]
#[command(name = "mcnf", version, about = "Multicommodity line-haul routing: preprocessing, QUBO encoding and solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic instance.
    Generate(GenerateArgs),
    /// Enumerate surviving paths per commodity.
    Preprocess(PreprocessArgs),
    /// Write the QUBO of an instance and its variable map.
    Encode(EncodeArgs),
    /// Solve an instance, or check a given assignment.
    Solve(SolveArgs),
    /// Run solvers over a benchmark suite and print a report.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    nodes: usize,
    /// Fraction of ordered node pairs that become arcs.
    #[arg(long)]
    density: f64,
    /// Fraction of ordered node pairs that carry a commodity.
    #[arg(long)]
    commodities: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    load_min: f64,
    #[arg(long, default_value_t = 20.0)]
    load_max: f64,
    #[arg(long, default_value_t = 1.5)]
    tat_slack: f64,
    #[arg(long, default_value_t = crate::preprocess::DEFAULT_MAX_HOPS)]
    max_hops: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// `all`, `nearest:M` or `radius:KM`.
    #[arg(long, default_value = "all")]
    policy: RestrictionPolicy,
    #[arg(long, default_value_t = crate::preprocess::DEFAULT_MAX_HOPS)]
    max_hops: usize,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(short, long)]
    output: PathBuf,
    /// Variable map path; defaults to the output path with `.varmap.json`.
    #[arg(long)]
    varmap: Option<PathBuf>,
    #[arg(long)]
    flow_penalty: Option<f64>,
    #[arg(long)]
    capacity_penalty: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Hybrid,
    Exact,
    Greedy,
    Anneal,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Hybrid => SolverKind::Hybrid,
            SolverArg::Exact => SolverKind::Exact,
            SolverArg::Greedy => SolverKind::Greedy,
            SolverArg::Anneal => SolverKind::Anneal,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "hybrid")]
    solver: SolverArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    time_limit_s: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, value_enum, default_value = "on")]
    repair: OnOff,
    /// Report feasibility and objective of this assignment instead of solving.
    #[arg(long, value_name = "ASSIGNMENT")]
    check: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    suite: PathBuf,
    /// Comma-separated solver names; replaces the suite's solver list.
    #[arg(long, value_delimiter = ',')]
    solvers: Vec<SolverKind>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Seed for solvers given with `--solvers`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-solver time budget for solvers given with `--solvers`.
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// Replace wall times with `-`.
    #[arg(long)]
    redact_timing: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    NoFeasible,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    let stdout = std::io::stdout();
    run(std::env::args_os(), &mut stdout.lock())
}

/// Parses `args` (program name first), runs the command writing its primary
/// output to `out`, and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Preprocess(a) => preprocess(a),
        Command::Encode(a) => encode(a),
        Command::Solve(a) => solve(a, out),
        Command::Bench(a) => bench(a, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::NoFeasible) => {
            eprintln!("error: no feasible routing found");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let inst = load_instance(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let report = validate_instance(&inst);
    if !report.ok {
        let issues: Vec<String> = report.issues.iter().map(|i| format!("{}: {}", i.location, i.message)).collect();
        bail!("invalid instance {}:\n  {}", path.display(), issues.join("\n  "));
    }
    Ok(inst)
}

fn prepare(a: &ModelArgs) -> anyhow::Result<(Instance, PreprocessedInstance)> {
    let inst = load(&a.input)?;
    let pre = restrict(&inst, &build_restriction_matrix(&inst, a.policy), a.max_hops)?;
    Ok((inst, pre))
}

fn model(a: &ModelArgs) -> anyhow::Result<MipModel> {
    let (inst, pre) = prepare(a)?;
    Ok(build_mip(&inst, &pre)?)
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let cfg = GeneratorConfig {
        load_range: (a.load_min, a.load_max),
        tat_slack: a.tat_slack,
        max_hops: a.max_hops,
        ..GeneratorConfig::new(a.nodes, a.density, a.commodities, a.seed)
    };
    let inst = generate_instance(&cfg).map_err(anyhow::Error::from)?;
    write(&a.output, &to_document(&inst))?;
    Ok(())
}

fn preprocess(a: PreprocessArgs) -> Result<(), Failure> {
    let (inst, pre) = prepare(&a.model)?;
    for k in &pre.infeasible {
        eprintln!("warning: commodity `{}` has no surviving path", inst.commodity(*k).id);
    }
    let text = serde_json::to_string_pretty(&paths_to_json(&inst, &pre)).map_err(anyhow::Error::from)?;
    write(&a.output, &text)?;
    Ok(())
}

fn encode(a: EncodeArgs) -> Result<(), Failure> {
    let m = model(&a.model)?;
    let mut cfg = PenaltyConfig::for_model(&m);
    if let Some(p) = a.flow_penalty {
        cfg.flow_penalty = p;
    }
    if let Some(p) = a.capacity_penalty {
        cfg.capacity_penalty = p;
    }
    let q = encode_qubo(&m, &cfg).map_err(anyhow::Error::from)?;
    for w in &q.warnings {
        eprintln!("warning: {}", serde_json::to_string(w).map_err(anyhow::Error::from)?);
    }
    write(&a.output, &write_qubo(&q))?;
    let varmap = a.varmap.unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".varmap.json");
        p.into()
    });
    let text = serde_json::to_string_pretty(&varmap_json(&q, &m)).map_err(anyhow::Error::from)?;
    write(&varmap, &text)?;
    Ok(())
}

fn emit(out: &mut dyn Write, text: &str) -> anyhow::Result<()> {
    out.write_all(text.as_bytes()).context("cannot write output")
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    if let Some(path) = &a.check {
        let doc: serde_json::Value =
            serde_json::from_str(&read(path)?).with_context(|| format!("in {}", path.display()))?;
        let asg = m.assignment_from_json(&doc).map_err(anyhow::Error::from)?;
        let report = check_feasibility(&m, &asg).map_err(anyhow::Error::from)?;
        let objective = objective_value(&m, &asg).map_err(anyhow::Error::from)?;
        let v = serde_json::json!({ "objective": objective, "feasibility": report });
        emit(out, &format!("{}\n", serde_json::to_string_pretty(&v).map_err(anyhow::Error::from)?))?;
        return Ok(());
    }
    let cfg = SolverConfig {
        kind: a.solver.into(),
        seed: a.seed,
        sweeps: a.sweeps,
        restarts: a.restarts,
        time_limit_s: a.time_limit_s,
        node_limit: a.node_limit,
        repair: matches!(a.repair, OnOff::On),
    };
    let r = run_solver(&m, &cfg).map_err(anyhow::Error::from)?;
    let mut v = r.to_json(&m);
    v["num_variables"] = model_stats(&m).num_variables.into();
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&v).map_err(anyhow::Error::from)?))?;
    if !r.feasible {
        return Err(Failure::NoFeasible);
    }
    Ok(())
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let text = read(&a.suite)?;
    let suite: BenchSuite = serde_json::from_str(&text).with_context(|| format!("in {}", a.suite.display()))?;
    let solvers: Vec<SolverConfig> = if a.solvers.is_empty() {
        suite.solvers.clone()
    } else {
        a.solvers
            .iter()
            .map(|&kind| SolverConfig { seed: a.seed, time_limit_s: a.time_limit_s, ..SolverConfig::new(kind) })
            .collect()
    };
    let configs = suite.resolve().map_err(anyhow::Error::from)?;
    let records = run_benchmark(&configs, &solvers, suite.policy).map_err(anyhow::Error::from)?;
    let report = emit_report_with(&records, a.format, ReportOptions { redact_timing: a.redact_timing });
    match &a.output {
        Some(p) => write(p, &report)?,
        None => emit(out, &report)?,
    }
    Ok(())
}
