//! CSV, aligned-table and plot-data renderings of benchmark records.

use std::fmt::Write;

use super::bench::BenchRecord;

pub const CSV_HEADER: &str = "num_variables,num_constraints,solver,objective,wall_time_s,mip_gap,instance_seed,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Table,
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "table" => Ok(ReportFormat::Table),
            "plotdata" => Ok(ReportFormat::PlotData),
            _ => Err(format!("unknown format `{s}` (expected csv, table or plotdata)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportOptions {
    /// Print `-` instead of wall times, so reruns compare byte for byte.
    pub redact_timing: bool,
}

pub fn emit_report(records: &[BenchRecord], format: ReportFormat) -> String {
    emit_report_with(records, format, ReportOptions::default())
}

pub fn emit_report_with(records: &[BenchRecord], format: ReportFormat, opts: ReportOptions) -> String {
    match format {
        ReportFormat::Csv => csv(records, opts),
        ReportFormat::Table => table(records, opts),
        ReportFormat::PlotData => plot_data(records, opts),
    }
}

/// Plain decimal below one million, otherwise `d.dddE+XX`.
pub fn format_objective(v: f64) -> String {
    if v.abs() < 1e6 || !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:E}");
    let (mantissa, exp) = s.split_once('E').expect("E formatting has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mantissa = if mantissa.contains('.') { mantissa.to_string() } else { format!("{mantissa}.0") };
    format!("{mantissa}E{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn cells(r: &BenchRecord, opts: ReportOptions) -> [String; 8] {
    [
        r.num_variables.to_string(),
        r.num_constraints.to_string(),
        r.solver_name.clone(),
        r.objective.map_or("NA".into(), format_objective),
        if opts.redact_timing { "-".into() } else { format!("{:.3}", r.wall_time) },
        r.gap.map_or("NA".into(), |g| format!("{g:.6}")),
        r.instance_seed.to_string(),
        r.status.clone(),
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(records: &[BenchRecord], opts: ReportOptions) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        let row: Vec<String> = cells(r, opts).iter().map(|c| csv_field(c)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn table(records: &[BenchRecord], opts: ReportOptions) -> String {
    let header = ["variables", "constraints", "solver", "objective", "time_s", "gap", "seed", "status"];
    let rows: Vec<[String; 8]> = records.iter().map(|r| cells(r, opts)).collect();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cols: Vec<&str>| {
        let parts: Vec<String> = cols
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, &w))| if i == 2 || i == 7 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in &rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

/// Per solver, in order of first appearance: a wall-time series then an
/// objective series, each a blank-line separated block of
/// `num_variables value` lines. Failed runs are left out.
fn plot_data(records: &[BenchRecord], opts: ReportOptions) -> String {
    let mut solvers: Vec<&str> = Vec::new();
    for r in records {
        if !solvers.contains(&r.solver_name.as_str()) {
            solvers.push(&r.solver_name);
        }
    }
    let mut blocks = Vec::new();
    for s in solvers {
        let ok = || records.iter().filter(move |r| r.solver_name == s && r.objective.is_some());
        let mut time = format!("# solver={s} series=wall_time_s\nnum_variables wall_time_s\n");
        let mut obj = format!("# solver={s} series=objective\nnum_variables objective\n");
        for r in ok() {
            let t = if opts.redact_timing { "-".to_string() } else { format!("{:.3}", r.wall_time) };
            writeln!(time, "{} {t}", r.num_variables).unwrap();
            writeln!(obj, "{} {}", r.num_variables, format_objective(r.objective.unwrap())).unwrap();
        }
        blocks.push(time);
        blocks.push(obj);
    }
    blocks.join("\n")
}
