use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use gave::bench::{configure_threads, emit_table, run_table_on, sweep_tau, BenchPlan, TableFormat};
use gave::convergence::{
    check_gnms, check_gnms_tau_window, check_mn, check_mn_classic, check_nms, check_nms_classic, check_picard,
    check_picard_rho, check_rnms, check_rnms_classic, compute_scalars_for, Certificate,
};
use gave::linalg::mtx::{read_matrix, read_vector};
use gave::problem::{block_problem, load_problem, save_problem, GaveProblem};
use gave::solver::{MethodParams, MethodRegistry, Scheme, StopRule, Termination, DEFAULT_MAX_ITER, DEFAULT_THETA, DEFAULT_TOL};
use gave::splitting::{diag_multiple, triangular_splitting, DEFAULT_LOWER_WEIGHT};

const EXIT_USAGE: u8 = 1;
const EXIT_MAX_ITER: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_CONDITION_FAILS: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "gave", version, about = "Splitting iterations for Ax - B|x| = c")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem with one method.
    Solve(SolveArgs),
    /// Scan the relaxation grid and print the best tau.
    Sweep(SweepArgs),
    /// Evaluate a sufficient convergence condition.
    Check(CheckArgs),
    /// Run the method comparison table on the block test problem.
    Bench(BenchArgs),
    /// Write the block test problem as Matrix Market files plus a manifest.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct ProblemSource {
    /// Block test problem, e.g. `m=20` or `m=12,block_rows=5`.
    #[arg(long, value_name = "SPEC")]
    example: Option<String>,
    /// Problem manifest file, or a directory containing manifest.txt.
    #[arg(long, value_name = "PATH")]
    problem: Option<PathBuf>,
    /// Matrix A in Matrix Market format (needs --b and --c).
    #[arg(long, value_name = "FILE")]
    a: Option<PathBuf>,
    /// Matrix B in Matrix Market format.
    #[arg(long, value_name = "FILE")]
    b: Option<PathBuf>,
    /// Right-hand side c in Matrix Market array format.
    #[arg(long, value_name = "FILE")]
    c: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MethodArgs {
    /// Relaxation parameter tau in (0, 2].
    #[arg(long)]
    tau: Option<f64>,
    /// Omega (or its shifted/relaxed variants) as a multiple of diag(A).
    #[arg(long, value_name = "FACTOR")]
    omega: Option<f64>,
    /// Relaxation theta for rmn and rnms.
    #[arg(long)]
    theta: Option<f64>,
    /// Weight w of the inner splitting D - wL.
    #[arg(long, value_name = "W")]
    lower_weight: Option<f64>,
}

impl MethodArgs {
    fn params(&self) -> MethodParams {
        MethodParams {
            tau: self.tau,
            omega_factor: self.omega,
            theta: self.theta,
            lower_weight: self.lower_weight,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// Method name (see `gave solve --method list`).
    #[arg(long)]
    method: String,
    #[command(flatten)]
    params: MethodArgs,
    /// Stop when RES falls to this value.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Print the residual of every iterate.
    #[arg(long)]
    history: bool,
    /// Print the final iterate.
    #[arg(long)]
    print_x: bool,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// A method with a tau (gnms, fpi, rms).
    #[arg(long)]
    method: String,
    #[command(flatten)]
    params: MethodArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// gnms, gnms-tau-window, mn, mn-classic, picard-norm, picard-rho, nms, nms-classic, rnms, rnms-classic.
    #[arg(long)]
    condition: String,
    /// Method whose configuration the gnms conditions are evaluated for.
    #[arg(long)]
    method: Option<String>,
    #[command(flatten)]
    params: MethodArgs,
    /// Print the certificate as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Block test problem, e.g. `m=20`.
    #[arg(long, value_name = "SPEC", default_value = "m=20")]
    example: String,
    /// csv, json or text.
    #[arg(long, default_value = "text")]
    format: String,
    /// Timed repetitions per row.
    #[arg(long, default_value_t = gave::bench::DEFAULT_REPETITIONS)]
    repetitions: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Block test problem, e.g. `m=9`.
    #[arg(long, value_name = "SPEC")]
    example: String,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Also write the known solution x*.
    #[arg(long)]
    with_solution: bool,
}

/// Parses `m=20[,block_rows=..]`; a bare number is taken as `m`.
fn parse_example(spec: &str) -> anyhow::Result<(usize, usize)> {
    let mut m = None;
    let mut rows = None;
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').unwrap_or(("m", part));
        let value: usize = value
            .trim()
            .parse()
            .with_context(|| format!("bad number in example spec `{part}`"))?;
        match key.trim() {
            "m" => m = Some(value),
            "block_rows" | "rows" => rows = Some(value),
            other => bail!("unknown example key `{other}` (expected m or block_rows)"),
        }
    }
    let m = m.ok_or_else(|| anyhow!("example spec needs m, e.g. `m=20`"))?;
    Ok((m, rows.unwrap_or(m)))
}

impl ProblemSource {
    fn load(&self) -> anyhow::Result<GaveProblem> {
        let files = self.a.is_some() || self.b.is_some() || self.c.is_some();
        let count = self.example.is_some() as usize + self.problem.is_some() as usize + files as usize;
        if count != 1 {
            bail!("give exactly one problem source: --example, --problem, or --a/--b/--c");
        }
        if let Some(spec) = &self.example {
            let (m, rows) = parse_example(spec)?;
            return Ok(block_problem(m, rows)?);
        }
        if let Some(path) = &self.problem {
            return Ok(load_problem(path)?);
        }
        let (Some(a), Some(b), Some(c)) = (&self.a, &self.b, &self.c) else {
            bail!("--a, --b and --c must be given together");
        };
        let problem = GaveProblem {
            a: read_matrix(a)?,
            b: read_matrix(b)?,
            c: read_vector(c)?,
            x_star: None,
            label: a.display().to_string(),
        };
        problem.validate()?;
        Ok(problem)
    }
}

fn termination_code(t: Termination) -> u8 {
    match t {
        Termination::Converged => 0,
        Termination::MaxIter => EXIT_MAX_ITER,
        Termination::Diverged => EXIT_DIVERGED,
    }
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<u8> {
    let registry = MethodRegistry::with_builtins();
    if args.method == "list" {
        for m in registry.iter() {
            println!("{:<8} {}", m.name(), m.summary());
        }
        return Ok(0);
    }
    let problem = args.source.load()?;
    let preset = registry
        .build(&args.method, &problem.a, &args.params.params())?
        .with_stop(StopRule {
            tol: args.tol,
            max_iter: args.max_iter,
        });
    let report = match preset.solve(&problem.b, &problem.c, None, None) {
        Ok(r) => r,
        Err(e @ gave::Error::NonFiniteIterate { .. }) => {
            eprintln!("gave: {e}");
            return Ok(EXIT_DIVERGED);
        }
        Err(e) => return Err(e.into()),
    };
    if args.json {
        let mut value = serde_json::to_value(&report)?;
        value["method"] = preset.name.clone().into();
        value["params"] = preset.params.clone().into();
        if !args.history {
            value.as_object_mut().expect("object").remove("residual_history");
        }
        if !args.print_x {
            let obj = value.as_object_mut().expect("object");
            obj.remove("x_final");
            obj.remove("y_final");
        }
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        println!("method: {}", preset.name);
        if !preset.params.is_empty() {
            println!("params: {}", preset.params);
        }
        println!("n: {}", problem.dim());
        println!("termination: {}", serde_json::to_value(report.termination)?.as_str().unwrap_or("?"));
        println!("IT: {}", report.iterations);
        println!("RES: {:e}", report.final_residual());
        println!("time_s: {:.6}", report.wall_time_seconds);
        if args.history {
            println!("history:");
            for (k, r) in report.residual_history.iter().enumerate() {
                println!("{k} {r:e}");
            }
        }
        if args.print_x {
            println!("x:");
            for v in &report.x_final {
                println!("{v:e}");
            }
        }
    }
    Ok(termination_code(report.termination))
}

fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<u8> {
    let problem = args.source.load()?;
    let preset = MethodRegistry::with_builtins().build(&args.method, &problem.a, &args.params.params())?;
    let mut plan = BenchPlan::table(0, 0);
    plan.repetitions = 1;
    plan.tol = args.tol;
    plan.max_iter = args.max_iter;
    let (tau, row) = sweep_tau(&plan, &problem, &preset)?;
    println!("method: {}", preset.name);
    println!("tau_opt: {tau:.2}");
    println!("IT: {}", row.it.map_or("-".into(), |v| v.to_string()));
    println!("RES: {:e}", row.res.unwrap_or(f64::NAN));
    Ok(row.termination.map_or(EXIT_DIVERGED, termination_code))
}

/// Accepts the long-form names some scripts use for the two-step conditions.
fn canonical_condition(name: &str) -> &str {
    match name {
        "theorem-3-1" => "gnms",
        "corollary-3-2" => "gnms-tau-window",
        "picard" => "picard-norm",
        other => other,
    }
}

fn cmd_check(args: &CheckArgs) -> anyhow::Result<u8> {
    let condition = canonical_condition(&args.condition);
    let known = [
        "gnms",
        "gnms-tau-window",
        "mn",
        "mn-classic",
        "picard-norm",
        "picard-rho",
        "nms",
        "nms-classic",
        "rnms",
        "rnms-classic",
    ];
    if !known.contains(&condition) {
        bail!("unknown condition `{}` (expected one of {})", args.condition, known.join(", "));
    }
    // splitting flags are checked before any work so usage errors stay cheap
    let need_omega = matches!(condition, "mn" | "mn-classic" | "nms" | "nms-classic" | "rnms" | "rnms-classic");
    if condition.starts_with("gnms") && args.method.is_none() {
        bail!("condition `{}` needs the splitting given by --method (and its parameters)", args.condition);
    }
    if need_omega && args.params.omega.is_none() {
        bail!("condition `{}` needs --omega", args.condition);
    }
    let problem = args.source.load()?;
    let (a, b) = (&problem.a, &problem.b);
    let omega = || diag_multiple(a, args.params.omega.expect("checked above"));
    let inner = || triangular_splitting(a, args.params.lower_weight.unwrap_or(DEFAULT_LOWER_WEIGHT));
    let theta = args.params.theta.unwrap_or(DEFAULT_THETA);
    let cert: Certificate = match condition {
        "gnms" | "gnms-tau-window" => {
            let method = args.method.as_deref().expect("checked above");
            let preset = MethodRegistry::with_builtins().build(method, a, &args.params.params())?;
            let Scheme::Gnms(cfg) = &preset.scheme else {
                bail!("method `{method}` does not run on the two-step engine; pick gnms, mn, picard, nms, ngs, rmn or rnms");
            };
            let s = compute_scalars_for(cfg, b)?;
            if condition == "gnms" {
                check_gnms(&s)
            } else {
                check_gnms_tau_window(&s)
            }
        }
        "mn" => check_mn(a, b, &omega())?,
        "mn-classic" => check_mn_classic(a, b, &omega())?,
        "picard-norm" => check_picard(a, b)?,
        "picard-rho" => check_picard_rho(a, b)?,
        "nms" => check_nms(&inner()?, b, &omega())?,
        "nms-classic" => check_nms_classic(&inner()?, b, &omega())?,
        "rnms" => check_rnms(&inner()?, theta, &omega(), b)?,
        "rnms-classic" => check_rnms_classic(&inner()?, theta, &omega(), b)?,
        _ => unreachable!("filtered above"),
    };
    if args.json {
        println!("{}", cert.to_json());
    } else {
        println!(
            "{} {} margin={:.6e} value={:.6}",
            cert.condition,
            if cert.holds { "holds" } else { "fails" },
            cert.margin,
            cert.value()
        );
        for ineq in &cert.details {
            println!(
                "  {}: {:.6} < {:.6} {}",
                ineq.label,
                ineq.lhs,
                ineq.rhs,
                if ineq.holds { "holds" } else { "fails" }
            );
        }
    }
    Ok(if cert.holds { 0 } else { EXIT_CONDITION_FAILS })
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<u8> {
    let format: TableFormat = args.format.parse()?;
    let (m, rows) = parse_example(&args.example)?;
    let mut plan = BenchPlan::table(m, rows);
    plan.repetitions = args.repetitions;
    plan.tol = args.tol;
    plan.max_iter = args.max_iter;
    let problem = plan.problem()?;
    let table = run_table_on(&plan, &problem, &MethodRegistry::with_builtins())?;
    print!("{}", emit_table(&table, format)?);
    let worst = table
        .iter()
        .map(|r| r.termination.map_or(EXIT_DIVERGED, termination_code))
        .max()
        .unwrap_or(0);
    Ok(worst)
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<u8> {
    let (m, rows) = parse_example(&args.example)?;
    let mut problem = block_problem(m, rows)?;
    if !args.with_solution {
        problem.x_star = None;
    }
    let manifest = save_problem(&problem, &args.out)?;
    println!("{}", manifest.display());
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    configure_threads()?;
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Check(a) => cmd_check(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let help = !e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if help { 0 } else { EXIT_USAGE });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gave: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
