//! End-to-end numerical experiments: solve the direct problem on `[0, 2L]`,
//! move the distribution onto a finer grid on `[0, L]`, perturb it, and run
//! every inverse method over a grid of regularization parameters.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rayon::prelude::*;

use crate::direct::{solve_eigenpair, DirectConfig, EigenPair};
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, Grid, GridFunction};
use crate::inverse::{solve, InverseConfig, Method};
use crate::metrics::{average_over_seeds, ConvergenceFit, ErrorReport, SweepRecord};
use crate::noise::{perturb, NoiseSpec};
use crate::rate::RateSpec;

/// Tail mass bound `dx * sum_{x >= L} N` checked after every direct solve.
pub const TAIL_MASS_BOUND: f64 = 1e-4;
/// Pointwise tail bound relative to the peak.
pub const TAIL_PEAK_RATIO: f64 = 1e-6;

/// `count` log-spaced points from `lo` to `hi`, both included.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)).collect()
        }
    }
}

pub fn default_alphas() -> Vec<f64> {
    log_space(1e-3, 1.0, 13)
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub b_spec: RateSpec,
    /// Inverse problems live on `[0, L]`; the direct problem on `[0, 2L]`.
    pub half_length: f64,
    pub direct_intervals: usize,
    /// Inverse grid has `refine_factor * direct_intervals` intervals.
    pub refine_factor: usize,
    pub theta: f64,
    pub stop_tol: f64,
    pub epsilons: Vec<f64>,
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Also run every method with the exact growth rate.
    pub use_exact_lambda: bool,
    pub b_threshold: f64,
    /// Directory for cached direct solutions.
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentPlan {
    fn base(b_spec: RateSpec, direct_intervals: usize, epsilons: Vec<f64>) -> Self {
        Self {
            b_spec,
            half_length: 4.0,
            direct_intervals,
            refine_factor: 10,
            theta: 1.0,
            stop_tol: 1e-10,
            epsilons,
            alphas: default_alphas(),
            seeds: (0..5).collect(),
            methods: Method::ALL.to_vec(),
            use_exact_lambda: false,
            b_threshold: 0.01,
            cache_dir: None,
        }
    }

    /// Exact data on a 1000-interval direct grid.
    pub fn noiseless(b_spec: RateSpec) -> Self {
        let mut plan = Self::base(b_spec, 1000, vec![0.0]);
        plan.seeds = vec![0];
        plan
    }

    /// Noise levels 0.01, 0.05 and 0.1 on a 100-interval direct grid.
    pub fn noisy(b_spec: RateSpec) -> Self {
        Self::base(b_spec, 100, vec![0.01, 0.05, 0.1])
    }

    /// Small noise levels on a 500-interval direct grid.
    pub fn small_noise(b_spec: RateSpec) -> Self {
        Self::base(b_spec, 500, vec![1e-4, 3e-4, 1e-3, 3e-3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.refine_factor < 1 {
            return Err(Error::InvalidArgument("refine_factor must be >= 1".into()));
        }
        if !(self.half_length > 0.0) {
            return Err(Error::InvalidArgument(format!("L must be positive, got {}", self.half_length)));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e >= 0.0)) {
            return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {e}")));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a >= 0.0)) {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {a}")));
        }
        if self.methods.is_empty() || self.seeds.is_empty() || self.alphas.is_empty() || self.epsilons.is_empty() {
            return Err(Error::InvalidArgument("methods, seeds, alphas and epsilons must be nonempty".into()));
        }
        self.b_spec.validate()
    }

    pub fn direct_grid(&self) -> Result<Grid> {
        Grid::new(2.0 * self.half_length, self.direct_intervals)
    }

    pub fn inverse_grid(&self) -> Result<Grid> {
        Grid::new(self.half_length, self.refine_factor * self.direct_intervals)
    }

    pub fn direct_config(&self) -> Result<DirectConfig> {
        let mut cfg = DirectConfig::new(self.direct_grid()?);
        cfg.theta = self.theta;
        cfg.stop_tol = self.stop_tol;
        Ok(cfg)
    }

    /// `# key=value` lines describing the plan.
    pub fn header_lines(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";");
        vec![
            format!("b={}", self.b_spec),
            format!("L={}", self.half_length),
            format!("direct_intervals={}", self.direct_intervals),
            format!("refine_factor={}", self.refine_factor),
            format!("theta={}", self.theta),
            format!("tol={}", self.stop_tol),
            format!("epsilons={}", list(&self.epsilons)),
            format!("alphas={}", list(&self.alphas)),
            format!("seeds={}", self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";")),
            format!("methods={}", self.methods.iter().map(Method::name).collect::<Vec<_>>().join(";")),
            format!("exact_lambda={}", self.use_exact_lambda),
        ]
    }
}

/// Smallness of the stable distribution beyond the inverse domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCheck {
    /// `max_{x >= L} N / max N`.
    pub peak_ratio: f64,
    /// `dx * sum_{x >= L} N`.
    pub mass: f64,
}

impl TailCheck {
    pub fn measure(n: &GridFunction, half_length: f64) -> Self {
        let g = n.grid();
        let start = (half_length / g.dx() - 1e-9).ceil() as usize;
        let tail = &n.values()[start.min(n.len())..];
        let peak = n.max_value();
        let tail_max = tail.iter().copied().fold(0.0, f64::max);
        Self {
            peak_ratio: if peak > 0.0 { tail_max / peak } else { 0.0 },
            mass: g.dx() * tail.iter().sum::<f64>(),
        }
    }

    pub fn peak_ok(&self) -> bool {
        self.peak_ratio <= TAIL_PEAK_RATIO
    }

    pub fn mass_ok(&self) -> bool {
        self.mass <= TAIL_MASS_BOUND
    }
}

#[derive(Clone, Debug)]
pub struct DirectRun {
    pub pair: EigenPair,
    pub tail: TailCheck,
    pub from_cache: bool,
}

/// Solves (or loads from the cache) the direct problem of the plan.
pub fn run_direct(plan: &ExperimentPlan) -> Result<DirectRun> {
    plan.validate()?;
    let cfg = plan.direct_config()?;
    let cached = plan.cache_dir.as_deref().map(|dir| cache_path(dir, plan));
    let mut from_cache = false;
    let pair = match cached.as_deref().map(|p| load_cached(p, &cfg)) {
        Some(Ok(Some(pair))) => {
            from_cache = true;
            pair
        }
        other => {
            if let Some(Err(e)) = other {
                warn!("ignoring unreadable direct cache: {e}");
            }
            let b = plan.b_spec.sample(&cfg.grid)?;
            let pair = solve_eigenpair(&b, &cfg)?;
            if let Some(path) = &cached {
                store_cached(path, &pair, &cfg)?;
            }
            pair
        }
    };
    let tail = TailCheck::measure(&pair.n, plan.half_length);
    if !tail.peak_ok() {
        warn!(
            "stable distribution is not small beyond x = {}: max tail / max = {:.3e}",
            plan.half_length, tail.peak_ratio
        );
    }
    debug!("direct: lambda0 = {}, {} iterations, tail {:?}", pair.lambda0, pair.iterations, tail);
    Ok(DirectRun { pair, tail, from_cache })
}

fn cache_path(dir: &Path, plan: &ExperimentPlan) -> PathBuf {
    let key: String = format!("{}_{}_{}", plan.b_spec, plan.direct_intervals, plan.half_length)
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '_' })
        .collect();
    dir.join(format!("direct_{key}.csv"))
}

/// Settings and eigenpair diagnostics as `key=value` header lines.
pub fn direct_header(pair: &EigenPair, cfg: &DirectConfig) -> Vec<String> {
    vec![
        format!("theta={}", fmt_f64(cfg.theta)),
        format!("tol={}", fmt_f64(cfg.stop_tol)),
        format!("lambda0={}", fmt_f64(pair.lambda0)),
        format!("lambda_log_ratio={}", fmt_f64(pair.lambda_log_ratio)),
        format!("growth_factor={}", fmt_f64(pair.growth_factor)),
        format!("iterations={}", pair.iterations),
        format!("final_residual={}", fmt_f64(pair.final_residual)),
    ]
}

fn store_cached(path: &Path, pair: &EigenPair, cfg: &DirectConfig) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    pair.n.write_csv(path, &direct_header(pair, cfg))
}

/// `key=value` pairs from `# ` comment lines.
pub fn header_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .flat_map(|l| l.split(','))
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect()
}

pub fn header_get<T: std::str::FromStr>(values: &[(String, String)], key: &'static str) -> Result<T> {
    let raw = values
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Parse { what: "csv header", detail: format!("missing `{key}`") })?;
    raw.parse()
        .map_err(|_| Error::Parse { what: "csv header", detail: format!("bad value for `{key}`: {raw}") })
}

/// `Ok(None)` when the cache entry is absent or was built with other settings.
fn load_cached(path: &Path, cfg: &DirectConfig) -> Result<Option<EigenPair>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let h = header_values(&text);
    let theta: f64 = header_get(&h, "theta")?;
    let tol: f64 = header_get(&h, "tol")?;
    let n = GridFunction::from_csv(&text)?;
    if theta != cfg.theta || tol != cfg.stop_tol || !n.grid().same_as(&cfg.grid) {
        return Ok(None);
    }
    Ok(Some(EigenPair {
        n,
        lambda0: header_get(&h, "lambda0")?,
        lambda_log_ratio: header_get(&h, "lambda_log_ratio")?,
        growth_factor: header_get(&h, "growth_factor")?,
        iterations: header_get(&h, "iterations")?,
        final_residual: header_get(&h, "final_residual")?,
    }))
}

/// Noise seed of the job at noise-level index `eps_index`.
pub fn noise_seed(seed: u64, eps_index: usize) -> u64 {
    seed.wrapping_add(eps_index as u64)
}

fn sweep_job(
    plan: &ExperimentPlan,
    clean: &GridFunction,
    b_true: &GridFunction,
    lambda0: f64,
    eps_index: usize,
    seed: u64,
) -> Vec<SweepRecord> {
    let epsilon = plan.epsilons[eps_index];
    let n_eps = perturb(clean, &NoiseSpec { epsilon, seed: noise_seed(seed, eps_index) });
    let variants: &[bool] = if plan.use_exact_lambda { &[false, true] } else { &[false] };
    let mut out = Vec::with_capacity(plan.methods.len() * plan.alphas.len() * variants.len());
    for &method in &plan.methods {
        for &alpha in &plan.alphas {
            for &exact_lambda in variants {
                let cfg = InverseConfig {
                    alpha,
                    b_threshold: plan.b_threshold,
                    lambda_override: exact_lambda.then_some(lambda0),
                };
                let outcome = solve(method, &n_eps, &cfg)
                    .and_then(|r| Ok((r.lambda_used.value, ErrorReport::new(b_true, &r, &n_eps, Some(lambda0))?)));
                let mut rec = SweepRecord {
                    method,
                    exact_lambda,
                    epsilon,
                    alpha,
                    seed,
                    delta: f64::NAN,
                    delta_rel_l2: f64::NAN,
                    lambda_used: f64::NAN,
                    lambda_abs_err: f64::NAN,
                    failure: None,
                };
                match outcome {
                    Ok((lambda_used, report)) => {
                        rec.delta = report.delta;
                        rec.delta_rel_l2 = report.delta_rel_l2;
                        rec.lambda_used = lambda_used;
                        rec.lambda_abs_err = report.lambda_abs_err.unwrap_or(f64::NAN);
                    }
                    Err(e) => {
                        warn!("{method} eps={epsilon} alpha={alpha} seed={seed}: {e}");
                        rec.failure = Some(e.to_string());
                    }
                }
                out.push(rec);
            }
        }
    }
    out
}

/// Canonical record order: method, exact-rate flag, epsilon, alpha, seed.
pub fn sort_records(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.exact_lambda.cmp(&b.exact_lambda))
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.seed.cmp(&b.seed))
    });
}

/// One record per `(method, epsilon, alpha, seed)`, twice as many with
/// `use_exact_lambda`. Solver failures are recorded, not propagated.
pub fn run_sweep(plan: &ExperimentPlan, direct: &DirectRun) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    let fine = plan.inverse_grid()?;
    let clean = direct.pair.n.resample(&fine)?;
    let b_true = plan.b_spec.sample(&fine)?;
    let lambda0 = direct.pair.lambda0;
    let jobs: Vec<(usize, u64)> =
        (0..plan.epsilons.len()).flat_map(|e| plan.seeds.iter().map(move |&s| (e, s))).collect();
    let mut records: Vec<SweepRecord> = jobs
        .par_iter()
        .flat_map_iter(|&(e, s)| sweep_job(plan, &clean, &b_true, lambda0, e, s))
        .collect();
    sort_records(&mut records);
    Ok(records)
}

/// Seed-averaged `min_alpha delta` curves and their log-log fits, one per
/// method (and per rate variant present in the records).
pub fn run_convergence(records: &[SweepRecord]) -> Result<Vec<ConvergenceFit>> {
    let cells = average_over_seeds(records);
    let mut keys: Vec<(Method, bool)> = cells.iter().map(|c| (c.method, c.exact_lambda)).collect();
    keys.sort();
    keys.dedup();
    if keys.is_empty() {
        return Err(Error::InvalidArgument("no successful records".into()));
    }
    keys.into_iter().map(|(m, exact)| ConvergenceFit::from_cells(m, exact, &cells)).collect()
}

pub fn records_to_csv(records: &[SweepRecord], header_comments: &[String]) -> String {
    let mut out = String::new();
    for line in header_comments {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(SweepRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let bad = |detail: String| Error::Parse { what: "sweep csv", detail };
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some(h) if h == SweepRecord::CSV_HEADER => {}
        other => return Err(bad(format!("expected header `{}`, got {other:?}", SweepRecord::CSV_HEADER))),
    }
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(bad(format!("expected 8 columns in `{line}`")));
            }
            let (method, exact_lambda) = match cols[0].strip_suffix("@exact") {
                Some(m) => (m, true),
                None => (cols[0], false),
            };
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}` in `{line}`")));
            let failed = cols[4].is_empty();
            let metric = |s: &str| if failed { Ok(f64::NAN) } else { num(s) };
            Ok(SweepRecord {
                method: method.parse()?,
                exact_lambda,
                epsilon: num(cols[1])?,
                alpha: num(cols[2])?,
                seed: cols[3].parse().map_err(|_| bad(format!("bad seed `{}`", cols[3])))?,
                delta: metric(cols[4])?,
                delta_rel_l2: metric(cols[5])?,
                lambda_used: metric(cols[6])?,
                lambda_abs_err: metric(cols[7])?,
                failure: failed.then(|| "failed".to_owned()),
            })
        })
        .collect()
}

/// Convergence curves as `method,epsilon,min_delta,argmin_alpha` rows, with
/// the fits as comment lines.
pub fn convergence_to_csv(fits: &[ConvergenceFit]) -> String {
    let mut out = String::new();
    for f in fits {
        let label = if f.exact_lambda { format!("{}@exact", f.method) } else { f.method.to_string() };
        let _ = write!(
            out,
            "# fit method={label}, slope={}, intercept={}",
            fmt_f64(f.delta_fit.slope),
            fmt_f64(f.delta_fit.intercept)
        );
        match f.alpha_fit {
            Some(a) => {
                let _ = writeln!(out, ", alpha_slope={}, alpha_intercept={}", fmt_f64(a.slope), fmt_f64(a.intercept));
            }
            None => out.push('\n'),
        }
    }
    out.push_str("method,epsilon,min_delta,argmin_alpha\n");
    for f in fits {
        let label = if f.exact_lambda { format!("{}@exact", f.method) } else { f.method.to_string() };
        for p in &f.points {
            let _ = writeln!(
                out,
                "{label},{},{},{}",
                fmt_f64(p.epsilon),
                fmt_f64(p.min_delta),
                fmt_f64(p.argmin_alpha)
            );
        }
    }
    out
}
