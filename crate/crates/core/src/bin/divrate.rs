use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use divrate::direct::solve_eigenpair;
use divrate::error::{Error, Result};
use divrate::experiments::{
    convergence_to_csv, default_alphas, direct_header, header_get, header_values, records_from_csv,
    records_to_csv, run_convergence, run_direct, run_sweep, ExperimentPlan,
};
use divrate::grid::{fmt_f64, Grid, GridFunction};
use divrate::inverse::{result_to_csv, solve, InverseConfig, Method};
use divrate::metrics::ErrorReport;
use divrate::noise::{perturb, realized_relative_error, NoiseSpec};
use divrate::rate::RateSpec;

#[derive(Parser)]
#[command(name = "divrate", version, about = "Division-rate recovery for size-structured cell populations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stable distribution and growth rate for a given division rate.
    Direct(DirectArgs),
    /// Recover the division rate from one (noisy) distribution.
    Inverse(InverseArgs),
    /// Run every method over grids of noise levels, parameters and seeds.
    Sweep(SweepArgs),
    /// Minimal error against noise level from a sweep CSV.
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct DirectArgs {
    /// `const:<b>`, `jump:<low>:<high>:<x>`, `gauss-bump:<base>:<amp>:<center>:<width>` or a CSV file.
    #[arg(long, default_value = "const:1")]
    b: String,
    /// Number of grid intervals.
    #[arg(long, default_value_t = 800)]
    points: usize,
    /// Domain length.
    #[arg(long, default_value_t = 8.0)]
    domain: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InverseArgs {
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the growth rate of the direct solve instead of the estimate.
    #[arg(long)]
    exact_lambda: bool,
    /// Stable distribution CSV on `[0, 2L]`, or `auto` to solve for it.
    #[arg(long, default_value = "auto")]
    n: String,
    /// True division rate; required for `--n auto`, enables error metrics.
    #[arg(long)]
    b: Option<String>,
    /// Direct grid intervals for `--n auto`.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Inverse domain length `L`; half the data domain when omitted.
    #[arg(long)]
    half_length: Option<f64>,
    #[arg(long, default_value_t = 10)]
    refine: usize,
    #[arg(long, default_value_t = 0.01)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "const:1")]
    b: String,
    /// Comma-separated; 13 log-spaced values from 1e-3 to 1 when omitted.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1])]
    epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1, 2, 3, 4])]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "brute,filter,qr,mixed")]
    methods: Vec<String>,
    #[arg(long)]
    exact_lambda: bool,
    /// Direct grid intervals.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 4.0)]
    half_length: f64,
    #[arg(long, default_value_t = 10)]
    refine: usize,
    /// Directory caching direct solutions between runs.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long)]
    from: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e })
        }
    }
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>> {
    names.iter().map(|m| m.parse()).collect()
}

fn direct(args: &DirectArgs) -> Result<()> {
    let b_spec = RateSpec::parse(&args.b)?;
    let grid = Grid::new(args.domain, args.points)?;
    let mut cfg = divrate::direct::DirectConfig::new(grid);
    cfg.theta = args.theta;
    cfg.stop_tol = args.tol;
    let pair = solve_eigenpair(&b_spec.sample(&grid)?, &cfg)?;
    let mut header = vec![format!("b={b_spec}"), format!("points={}", args.points), format!("domain={}", args.domain)];
    header.extend(direct_header(&pair, &cfg));
    emit(args.out.as_deref(), &pair.n.to_csv(&header))
}

fn inverse(args: &InverseArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    let b_spec = args.b.as_deref().map(RateSpec::parse).transpose()?;
    let (data, lambda0) = if args.n == "auto" {
        let mut plan = ExperimentPlan::noisy(b_spec.clone().unwrap_or(RateSpec::Constant(1.0)));
        plan.direct_intervals = args.points;
        if let Some(l) = args.half_length {
            plan.half_length = l;
        }
        let run = run_direct(&plan)?;
        (run.pair.n, Some(run.pair.lambda0))
    } else {
        let path = Path::new(&args.n);
        let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let lambda0 = header_get::<f64>(&header_values(&text), "lambda0").ok();
        (GridFunction::from_csv(&text)?, lambda0)
    };
    let b_spec = match (b_spec, args.n == "auto") {
        (None, true) => Some(RateSpec::Constant(1.0)),
        (b, _) => b,
    };
    let half_length = args.half_length.unwrap_or(data.grid().x_max() / 2.0);
    let fine = Grid::new(half_length, args.refine * data.grid().intervals())?;
    let clean = data.resample(&fine)?;
    let n_eps = perturb(&clean, &NoiseSpec::new(args.eps, args.seed)?);
    let lambda_override = match (args.exact_lambda, lambda0) {
        (false, _) => None,
        (true, Some(l)) => Some(l),
        (true, None) => {
            return Err(Error::InvalidArgument("--exact-lambda needs a `lambda0` header in the data file".into()))
        }
    };
    let cfg = InverseConfig { alpha: args.alpha, b_threshold: args.threshold, lambda_override };
    let result = solve(method, &n_eps, &cfg)?;
    let mut header = vec![
        format!(
            "method={method}, alpha={}, lambda={}, seed={}, epsilon={}",
            fmt_f64(args.alpha),
            fmt_f64(result.lambda_used.value),
            args.seed,
            fmt_f64(args.eps)
        ),
        format!("realized_rel_error={}", fmt_f64(realized_relative_error(&clean, &n_eps))),
        format!("residual={}", fmt_f64(result.residual())),
    ];
    if let Some(b) = &b_spec {
        let report = ErrorReport::new(&b.sample(&fine)?, &result, &n_eps, lambda0)?;
        header.insert(0, format!("b={b}"));
        header.push(format!("delta={}, delta_rel_l2={}", fmt_f64(report.delta), fmt_f64(report.delta_rel_l2)));
    }
    emit(args.out.as_deref(), &result_to_csv(&result, &n_eps, &header)?)
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut plan = ExperimentPlan::noisy(RateSpec::parse(&args.b)?);
    plan.alphas = args.alphas.clone().unwrap_or_else(default_alphas);
    plan.epsilons = args.epsilons.clone();
    plan.seeds = args.seeds.clone();
    plan.methods = parse_methods(&args.methods)?;
    plan.use_exact_lambda = args.exact_lambda;
    plan.direct_intervals = args.points;
    plan.half_length = args.half_length;
    plan.refine_factor = args.refine;
    plan.cache_dir = args.cache_dir.clone();
    let direct = run_direct(&plan)?;
    let records = run_sweep(&plan, &direct)?;
    let mut header = plan.header_lines();
    header.push(format!("lambda0={}", fmt_f64(direct.pair.lambda0)));
    emit(args.out.as_deref(), &records_to_csv(&records, &header))
}

fn convergence(args: &ConvergenceArgs) -> Result<()> {
    let text = fs::read_to_string(&args.from).map_err(|e| Error::Io { path: args.from.clone(), source: e })?;
    let fits = run_convergence(&records_from_csv(&text)?)?;
    emit(args.out.as_deref(), &convergence_to_csv(&fits))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Direct(a) => direct(a),
        Command::Inverse(a) => inverse(a),
        Command::Sweep(a) => sweep(a),
        Command::Convergence(a) => convergence(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
