//! Error metrics for recovered division rates and log-log convergence fits.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::inverse::{InverseResult, Method};

/// Figure-of-merit of a reconstruction.
///
/// `delta = sum (B N_eps - H)^2 / sqrt(sum N_eps^2)` with plain node sums
/// (no `dx` weight), the numerator restricted to the nodes where `B` is
/// defined. The rate is compared through its product with the data, so nodes
/// near the origin weigh little. Refining the grid scales `delta` by roughly
/// `sqrt` of the refinement factor.
pub fn delta_metric(b_true: &GridFunction, result: &InverseResult, n_eps: &GridFunction) -> Result<f64> {
    let (num, den) = delta_parts(b_true, result, n_eps)?;
    Ok(num / den)
}

/// `||B N_eps - H|| / ||N_eps||` over the same nodes.
pub fn delta_rel_l2(b_true: &GridFunction, result: &InverseResult, n_eps: &GridFunction) -> Result<f64> {
    let (num, den) = delta_parts(b_true, result, n_eps)?;
    Ok(num.sqrt() / den)
}

fn delta_parts(b_true: &GridFunction, result: &InverseResult, n_eps: &GridFunction) -> Result<(f64, f64)> {
    b_true.check_same_grid(n_eps, "true rate and data")?;
    result.h.check_same_grid(n_eps, "recovered product and data")?;
    let (bv, hv, nv) = (b_true.values(), result.h.values(), n_eps.values());
    let num: f64 = result.b.defined().map(|(i, _)| (bv[i] * nv[i] - hv[i]).powi(2)).sum();
    let den = nv.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(den > 0.0) {
        return Err(Error::Degenerate("data has zero norm"));
    }
    Ok((num, den))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub delta: f64,
    pub delta_rel_l2: f64,
    pub lambda_abs_err: Option<f64>,
}

impl ErrorReport {
    pub fn new(
        b_true: &GridFunction,
        result: &InverseResult,
        n_eps: &GridFunction,
        lambda_true: Option<f64>,
    ) -> Result<Self> {
        Ok(Self {
            delta: delta_metric(b_true, result, n_eps)?,
            delta_rel_l2: delta_rel_l2(b_true, result, n_eps)?,
            lambda_abs_err: lambda_true.map(|l| (result.lambda_used.value - l).abs()),
        })
    }
}

/// One reconstruction in a parameter sweep. Failed solves keep their
/// parameters and carry the error message; their metrics are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub method: Method,
    /// The reconstruction used the exact growth rate instead of its estimate.
    pub exact_lambda: bool,
    pub epsilon: f64,
    pub alpha: f64,
    pub seed: u64,
    pub delta: f64,
    pub delta_rel_l2: f64,
    pub lambda_used: f64,
    pub lambda_abs_err: f64,
    pub failure: Option<String>,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str =
        "method,epsilon,alpha,seed,delta,delta_rel_l2,lambda_used,lambda_abs_err";

    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    /// Method column, with an `@exact` suffix for exact-rate runs.
    pub fn label(&self) -> String {
        if self.exact_lambda {
            format!("{}@exact", self.method)
        } else {
            self.method.to_string()
        }
    }

    /// Failed records leave the metric columns empty.
    pub fn to_csv_row(&self) -> String {
        use crate::grid::fmt_f64;
        let metric = |v: f64| if self.is_ok() { fmt_f64(v) } else { String::new() };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.label(),
            fmt_f64(self.epsilon),
            fmt_f64(self.alpha),
            self.seed,
            metric(self.delta),
            metric(self.delta_rel_l2),
            metric(self.lambda_used),
            metric(self.lambda_abs_err),
        )
    }
}

/// Seed-averaged metrics of one `(method, epsilon, alpha)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMean {
    pub method: Method,
    pub exact_lambda: bool,
    pub epsilon: f64,
    pub alpha: f64,
    pub delta: f64,
    pub delta_rel_l2: f64,
    pub lambda_abs_err: f64,
    pub seeds: usize,
}

/// Averages successful records over seeds. Cells with no successful record
/// are dropped.
pub fn average_over_seeds(records: &[SweepRecord]) -> Vec<CellMean> {
    let mut cells: Vec<CellMean> = Vec::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let found = cells.iter_mut().find(|c| {
            c.method == r.method && c.exact_lambda == r.exact_lambda && c.epsilon == r.epsilon && c.alpha == r.alpha
        });
        match found {
            Some(c) => {
                c.delta += r.delta;
                c.delta_rel_l2 += r.delta_rel_l2;
                c.lambda_abs_err += r.lambda_abs_err;
                c.seeds += 1;
            }
            None => cells.push(CellMean {
                method: r.method,
                exact_lambda: r.exact_lambda,
                epsilon: r.epsilon,
                alpha: r.alpha,
                delta: r.delta,
                delta_rel_l2: r.delta_rel_l2,
                lambda_abs_err: r.lambda_abs_err,
                seeds: 1,
            }),
        }
    }
    for c in &mut cells {
        let k = c.seeds as f64;
        c.delta /= k;
        c.delta_rel_l2 /= k;
        c.lambda_abs_err /= k;
    }
    cells
}

/// `(min delta, argmin alpha)` over the cells at noise level `epsilon`; ties
/// go to the smaller `alpha`.
pub fn min_over_alpha<'a>(cells: impl IntoIterator<Item = &'a CellMean>, epsilon: f64) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for c in cells.into_iter().filter(|c| c.epsilon == epsilon && c.delta.is_finite()) {
        best = match best {
            Some((d, a)) if d < c.delta || (d == c.delta && a <= c.alpha) => Some((d, a)),
            _ => Some((c.delta, c.alpha)),
        };
    }
    best.ok_or_else(|| Error::InvalidArgument(format!("no successful record at epsilon = {epsilon}")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LogLogFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least three points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidArgument(format!("log-log fit needs positive data, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x.ln(), sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points {
        let dx = x.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide"));
    }
    let slope = sxy / sxx;
    Ok(LogLogFit { slope, intercept: my - slope * mx })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergencePoint {
    pub epsilon: f64,
    pub min_delta: f64,
    pub argmin_alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceFit {
    pub method: Method,
    pub exact_lambda: bool,
    pub points: Vec<ConvergencePoint>,
    /// `min delta` against `epsilon`.
    pub delta_fit: LogLogFit,
    /// `argmin alpha` against `epsilon`; absent when the minimizer does not move.
    pub alpha_fit: Option<LogLogFit>,
}

impl ConvergenceFit {
    pub fn from_cells(method: Method, exact_lambda: bool, cells: &[CellMean]) -> Result<Self> {
        let mine = |c: &&CellMean| c.method == method && c.exact_lambda == exact_lambda;
        let mut eps: Vec<f64> = cells.iter().filter(mine).map(|c| c.epsilon).collect();
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        let mut points = Vec::with_capacity(eps.len());
        for e in eps {
            let (min_delta, argmin_alpha) = min_over_alpha(cells.iter().filter(mine), e)?;
            points.push(ConvergencePoint { epsilon: e, min_delta, argmin_alpha });
        }
        let delta_pts: Vec<_> = points.iter().map(|p| (p.epsilon, p.min_delta)).collect();
        let delta_fit = fit_loglog_slope(&delta_pts)?;
        let alpha_pts: Vec<_> = points.iter().map(|p| (p.epsilon, p.argmin_alpha)).collect();
        let alpha_fit = fit_loglog_slope(&alpha_pts).ok();
        Ok(Self { method, exact_lambda, points, delta_fit, alpha_fit })
    }
}
