//! Timed benchmark runs on the block-banded instance family.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{block_problem, GaveProblem};
use crate::solver::{MethodParams, MethodPreset, MethodRegistry, SolveReport, StopRule, Termination, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "GAVE_THREADS";
pub const DEFAULT_REPETITIONS: usize = 10;

/// `{0.01, 0.02, …, 2.00}`.
pub fn tau_grid() -> Vec<f64> {
    (1..=200).map(|k| k as f64 / 100.0).collect()
}

/// Sizes the global rayon pool from `GAVE_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool that is already running keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// One table row to produce: a registered method, its parameters, and whether `τ` is swept.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchEntry {
    pub method: String,
    pub params: MethodParams,
    pub sweep: bool,
}

impl BenchEntry {
    pub fn fixed(method: &str, params: MethodParams) -> Self {
        BenchEntry {
            method: method.into(),
            params,
            sweep: false,
        }
    }

    pub fn swept(method: &str) -> Self {
        BenchEntry {
            method: method.into(),
            params: MethodParams::default(),
            sweep: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchPlan {
    pub m: usize,
    pub block_rows: usize,
    pub entries: Vec<BenchEntry>,
    pub repetitions: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub tau_grid: Vec<f64>,
}

fn omega(f: f64) -> MethodParams {
    MethodParams {
        omega_factor: Some(f),
        ..Default::default()
    }
}

impl BenchPlan {
    /// The twelve standard method configurations, in table row order.
    pub fn table(m: usize, block_rows: usize) -> Self {
        let entries = vec![
            BenchEntry::swept("gnms"),
            BenchEntry::fixed("mn", omega(2.0)),
            BenchEntry::fixed("mn", omega(0.5)),
            BenchEntry::fixed("picard", MethodParams::default()),
            BenchEntry::swept("fpi"),
            BenchEntry::fixed("nms", omega(2.0)),
            BenchEntry::fixed("nms", omega(0.5)),
            BenchEntry::fixed("ngs", omega(2.0)),
            BenchEntry::fixed("ngs", omega(0.5)),
            BenchEntry::swept("rms"),
            BenchEntry::fixed("ssmn", omega(2.0)),
            BenchEntry::fixed("ssmn", omega(0.5)),
        ];
        BenchPlan {
            m,
            block_rows,
            entries,
            repetitions: DEFAULT_REPETITIONS,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            tau_grid: tau_grid(),
        }
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        if self.tau_grid.iter().any(|t| !(*t > 0.0) || *t > 2.0) {
            return Err(Error::InvalidParameter("tau grid must lie in (0, 2]".into()));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<GaveProblem> {
        block_problem(self.m, self.block_rows)
    }
}

/// A table row. Serialized keys match the CSV header `method,params,m,tau_opt,it,cpu_s,res`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: String,
    pub params: String,
    pub m: usize,
    pub tau_opt: Option<f64>,
    pub it: Option<usize>,
    /// Mean wall time of the iteration loop over the repetitions.
    pub cpu_s: Option<f64>,
    pub res: Option<f64>,
    #[serde(skip)]
    pub termination: Option<Termination>,
    #[serde(skip)]
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(method: String, params: String, m: usize, err: &Error) -> Self {
        BenchRow {
            method,
            params,
            m,
            tau_opt: None,
            it: None,
            cpu_s: None,
            res: None,
            termination: None,
            error: Some(err.to_string()),
        }
    }

    pub fn converged(&self) -> bool {
        self.termination == Some(Termination::Converged)
    }
}

fn repeat(preset: &MethodPreset, problem: &GaveProblem, m: usize, reps: usize, tau_opt: Option<f64>) -> Result<BenchRow> {
    let mut first: Option<SolveReport> = None;
    let mut total = 0.0;
    for _ in 0..reps {
        let r = preset.solve(&problem.b, &problem.c, None, None)?;
        total += r.wall_time_seconds;
        if let Some(f) = &first {
            debug_assert_eq!(f.iterations, r.iterations);
        } else {
            first = Some(r);
        }
    }
    let r = first.expect("at least one repetition");
    Ok(BenchRow {
        method: preset.name.clone(),
        params: preset.params.clone(),
        m,
        tau_opt,
        it: Some(r.iterations),
        cpu_s: Some(total / reps as f64),
        res: Some(r.final_residual()),
        termination: Some(r.termination),
        error: None,
    })
}

/// Scans the grid in increasing order and returns the first `τ` attaining the
/// smallest iteration count among converged runs, with that run's row.
pub fn sweep_tau(plan: &BenchPlan, problem: &GaveProblem, preset: &MethodPreset) -> Result<(f64, BenchRow)> {
    plan.validate()?;
    if preset.tau().is_none() {
        return Err(Error::InvalidParameter(format!("method {} has no tau to sweep", preset.name)));
    }
    let base = preset.with_stop(plan.stop_rule());
    // a run that needs more steps than some converged run cannot be the minimum
    let pilot_tau = preset.tau().filter(|t| plan.tau_grid.contains(t)).unwrap_or(plan.tau_grid[0]);
    let cap = base
        .with_tau(pilot_tau)
        .and_then(|p| p.solve(&problem.b, &problem.c, None, None))
        .ok()
        .filter(SolveReport::converged)
        .map_or(plan.max_iter, |r| r.iterations);
    let base = base.with_stop(StopRule {
        tol: plan.tol,
        max_iter: cap,
    });
    let outcomes: Vec<Option<usize>> = plan
        .tau_grid
        .par_iter()
        .map(|&tau| {
            let p = base.with_tau(tau).ok()?;
            let r = p.solve(&problem.b, &problem.c, None, None).ok()?;
            r.converged().then_some(r.iterations)
        })
        .collect();
    let best = outcomes.iter().flatten().min().copied().ok_or(Error::AllDiverged)?;
    let idx = outcomes.iter().position(|o| *o == Some(best)).expect("minimum is attained");
    let tau = plan.tau_grid[idx];
    let row = repeat(&preset.with_stop(plan.stop_rule()).with_tau(tau)?, problem, plan.m, plan.repetitions, Some(tau))?;
    Ok((tau, row))
}

fn run_entry(plan: &BenchPlan, problem: &GaveProblem, registry: &MethodRegistry, entry: &BenchEntry) -> BenchRow {
    let name = entry.method.clone();
    let build = registry
        .build(&entry.method, &problem.a, &entry.params)
        .map(|p| p.with_stop(plan.stop_rule()));
    let preset = match build {
        Ok(p) => p,
        Err(e) => return BenchRow::failed(name, String::new(), plan.m, &e),
    };
    let result = if entry.sweep {
        sweep_tau(plan, problem, &preset).map(|(_, row)| row)
    } else {
        repeat(&preset, problem, plan.m, plan.repetitions, None)
    };
    result.unwrap_or_else(|e| BenchRow::failed(preset.name.clone(), preset.params.clone(), plan.m, &e))
}

/// Runs every entry of the plan; rows come back in plan order and failures are
/// recorded in their row instead of aborting the table.
pub fn run_table(plan: &BenchPlan, registry: &MethodRegistry) -> Result<Vec<BenchRow>> {
    plan.validate()?;
    let problem = plan.problem()?;
    run_table_on(plan, &problem, registry)
}

pub fn run_table_on(plan: &BenchPlan, problem: &GaveProblem, registry: &MethodRegistry) -> Result<Vec<BenchRow>> {
    plan.validate()?;
    Ok(plan
        .entries
        .par_iter()
        .map(|e| run_entry(plan, problem, registry, e))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
    Text,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "text" | "txt" => Ok(TableFormat::Text),
            other => Err(Error::InvalidParameter(format!("unknown table format `{other}`"))),
        }
    }
}

pub fn emit_table(rows: &[BenchRow], format: TableFormat) -> Result<String> {
    match format {
        TableFormat::Csv => {
            let csv_err = |e: csv::Error| Error::InvalidParameter(e.to_string());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["method", "params", "m", "tau_opt", "it", "cpu_s", "res"])
                .map_err(csv_err)?;
            // Display gives the shortest round-trip form, matching the JSON numbers
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            for r in rows {
                w.write_record([
                    r.method.clone(),
                    r.params.clone(),
                    r.m.to_string(),
                    opt(r.tau_opt),
                    r.it.map_or(String::new(), |v| v.to_string()),
                    opt(r.cpu_s),
                    opt(r.res),
                ])
                .map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            Ok(s)
        }
        TableFormat::Text => Ok(text_table(rows)),
    }
}

fn text_table(rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:<34} {:>5} {:>7} {:>6} {:>11} {:>12}",
        "method", "params", "m", "tau_opt", "IT", "CPU", "RES"
    );
    for r in rows {
        let tau = r.tau_opt.map_or(String::new(), |t| format!("{t:.2}"));
        match &r.error {
            Some(e) => {
                let _ = writeln!(s, "{:<8} {:<34} {:>5} failed: {e}", r.method, r.params, r.m);
            }
            None => {
                let it = r.it.map_or(String::new(), |v| v.to_string());
                let cpu = r.cpu_s.map_or(String::new(), |v| format!("{v:.4}"));
                let res = r.res.map_or(String::new(), |v| format!("{v:.4e}"));
                let _ = writeln!(
                    s,
                    "{:<8} {:<34} {:>5} {:>7} {:>6} {:>11} {:>12}",
                    r.method, r.params, r.m, tau, it, cpu, res
                );
            }
        }
    }
    s
}
