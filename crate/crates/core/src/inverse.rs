//! Recovery of `H = B N` and of the division rate `B` from (noisy) data `N_eps`.
//!
//! Four solvers share the same shape: build a right-hand side `L` from the
//! data, solve a dilation recurrence for `H`, then divide by the data where it
//! is large enough.
//!
//! | method   | right-hand side                              | recurrence                     |
//! |----------|----------------------------------------------|--------------------------------|
//! | `brute`  | central differences, plain moment ratio      | sweep with `alpha = 0`         |
//! | `filter` | spectral `dN_alpha`, discrete moment ratio   | upward sweep from zero         |
//! | `qr`     | forward differences, QR ratio                | upwind transport sweep         |
//! | `mixed`  | mollified data and derivative, QR ratio      | upwind transport sweep         |

use std::fmt;
use std::str::FromStr;

use crate::dilation::{from_zero_residual, solve_from_zero};
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, half_index, Grid, GridFunction};
use crate::regularization::{
    lambda_ratio_filter, lambda_ratio_mixed, lambda_ratio_plain, lambda_ratio_qr, mollify,
    regularized_derivative, LambdaEstimate, LambdaVariant,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Brute,
    Filter,
    Qr,
    Mixed,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Brute, Method::Filter, Method::Qr, Method::Mixed];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Filter => "filter",
            Method::Qr => "qr",
            Method::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "brute" => Ok(Method::Brute),
            "filter" => Ok(Method::Filter),
            "qr" => Ok(Method::Qr),
            "mixed" => Ok(Method::Mixed),
            other => Err(Error::Parse { what: "method", detail: format!("unknown method `{other}`") }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseConfig {
    pub alpha: f64,
    /// `B` is only reported where `N_eps` exceeds this value.
    pub b_threshold: f64,
    /// Use this growth rate instead of the method's own estimate.
    pub lambda_override: Option<f64>,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self { alpha: 0.0, b_threshold: 0.01, lambda_override: None }
    }
}

impl InverseConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.b_threshold > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "b_threshold must be positive, got {}",
                self.b_threshold
            )));
        }
        Ok(())
    }

    fn lambda(&self, estimate: impl FnOnce() -> Result<LambdaEstimate>) -> Result<LambdaEstimate> {
        match self.lambda_override {
            Some(value) => Ok(LambdaEstimate { value, variant: LambdaVariant::Override }),
            None => estimate(),
        }
    }
}

/// Division rate on the nodes where it could be computed.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredRate {
    grid: Grid,
    values: Vec<Option<f64>>,
}

impl RecoveredRate {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn defined(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v)))
    }
}

#[derive(Clone, Debug)]
pub struct InverseResult {
    pub h: GridFunction,
    pub b: RecoveredRate,
    pub lambda_used: LambdaEstimate,
    pub method: Method,
    pub alpha: f64,
    /// Right-hand side fed to the recurrence.
    pub rhs: GridFunction,
}

impl InverseResult {
    /// Residual of the recurrence that produced `h`.
    pub fn residual(&self) -> f64 {
        match self.method {
            Method::Filter => from_zero_residual(self.h.values(), self.rhs.values()),
            _ => sweep_residual(&self.h, &self.rhs, self.alpha),
        }
    }
}

/// `x,N_eps,H,B` rows; `B` is empty where it is undefined.
pub fn result_to_csv(result: &InverseResult, n_eps: &GridFunction, header_comments: &[String]) -> Result<String> {
    use std::fmt::Write as _;
    result.h.check_same_grid(n_eps, "recovered product and data")?;
    let mut out = String::new();
    for line in header_comments {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("x,N_eps,H,B\n");
    let rows = n_eps.grid().nodes().zip(n_eps.values()).zip(result.h.values()).zip(result.b.values());
    for (((x, n), h), b) in rows {
        let b = b.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{b}", fmt_f64(x), fmt_f64(*n), fmt_f64(*h));
    }
    Ok(out)
}

/// `B_i = H_i / N_i` where `N_i > threshold`.
pub fn recover_b(h: &GridFunction, n_eps: &GridFunction, b_threshold: f64) -> Result<RecoveredRate> {
    h.check_same_grid(n_eps, "recovered product and data")?;
    let values = h
        .values()
        .iter()
        .zip(n_eps.values())
        .map(|(&h, &n)| (n > b_threshold).then(|| h / n))
        .collect();
    Ok(RecoveredRate { grid: *h.grid(), values })
}

/// Upwind sweep for `(alpha/dx)(H_i - H_{i-1}) + 4 H_i = H_{i/2} + L_{i/2}`
/// with `H_0 = 0`; node 1 is solved in closed form because the odd average
/// refers back to `H_1`.
pub fn quasi_reversible_sweep(l: &GridFunction, alpha: f64) -> GridFunction {
    let lv = l.values();
    let a = alpha / l.grid().dx();
    let n = lv.len();
    let mut h = vec![0.0; n];
    if n > 1 {
        h[1] = (a * h[0] + 0.5 * (h[0] + lv[0] + lv[1])) / (a + 3.5);
    }
    for i in 2..n {
        h[i] = (a * h[i - 1] + half_index(&h, i) + half_index(lv, i)) / (a + 4.0);
    }
    GridFunction::new(*l.grid(), h).expect("same length")
}

/// `l2` residual of the upwind sweep equations for `i >= 1`, with `H_0`
/// checked against zero.
pub fn sweep_residual(h: &GridFunction, l: &GridFunction, alpha: f64) -> f64 {
    let (hv, lv) = (h.values(), l.values());
    let a = alpha / h.grid().dx();
    let mut acc = hv[0] * hv[0];
    for i in 1..hv.len() {
        let r = a * (hv[i] - hv[i - 1]) + 4.0 * hv[i] - half_index(hv, i) - half_index(lv, i);
        acc += r * r;
    }
    acc.sqrt()
}

/// `L_i = dN_alpha,i + lambda N_i` with `L_0 = 0`.
pub fn build_l_filter(n_eps: &GridFunction, alpha: f64) -> Result<(GridFunction, LambdaEstimate)> {
    build_l_filter_with(n_eps, &InverseConfig::with_alpha(alpha))
}

fn build_l_filter_with(n_eps: &GridFunction, cfg: &InverseConfig) -> Result<(GridFunction, LambdaEstimate)> {
    let dn = regularized_derivative(n_eps, cfg.alpha);
    let lambda = cfg.lambda(|| lambda_ratio_filter(n_eps, &dn))?;
    let mut l = GridFunction::new(
        *n_eps.grid(),
        dn.values().iter().zip(n_eps.values()).map(|(d, n)| d + lambda.value * n).collect(),
    )?;
    l.values_mut()[0] = 0.0;
    Ok((l, lambda))
}

fn finish(
    method: Method,
    h: GridFunction,
    rhs: GridFunction,
    lambda_used: LambdaEstimate,
    n_eps: &GridFunction,
    cfg: &InverseConfig,
) -> Result<InverseResult> {
    let b = recover_b(&h, n_eps, cfg.b_threshold)?;
    Ok(InverseResult { h, b, lambda_used, method, alpha: cfg.alpha, rhs })
}

pub fn solve_filter(n_eps: &GridFunction, cfg: &InverseConfig) -> Result<InverseResult> {
    cfg.validate()?;
    let (l, lambda) = build_l_filter_with(n_eps, cfg)?;
    let h = solve_from_zero(&l).h;
    finish(Method::Filter, h, l, lambda, n_eps, cfg)
}

/// `L_i = lambda N_i + (N_{i+1} - N_i)/dx` with `N_{I+1} = 0`.
pub fn qr_rhs(n_eps: &GridFunction, lambda: f64) -> GridFunction {
    let nv = n_eps.values();
    let dx = n_eps.grid().dx();
    let last = nv.len() - 1;
    let values = (0..=last)
        .map(|i| {
            let next = if i < last { nv[i + 1] } else { 0.0 };
            lambda * nv[i] + (next - nv[i]) / dx
        })
        .collect();
    GridFunction::new(*n_eps.grid(), values).expect("same length")
}

pub fn solve_qr(n_eps: &GridFunction, cfg: &InverseConfig) -> Result<InverseResult> {
    cfg.validate()?;
    let lambda = cfg.lambda(|| lambda_ratio_qr(n_eps, cfg.alpha))?;
    let l = qr_rhs(n_eps, lambda.value);
    let h = quasi_reversible_sweep(&l, cfg.alpha);
    finish(Method::Qr, h, l, lambda, n_eps, cfg)
}

/// Second-order differences: central inside, one-sided at both ends.
pub fn central_derivative(n: &GridFunction) -> GridFunction {
    let nv = n.values();
    let dx = n.grid().dx();
    let last = nv.len() - 1;
    let values = (0..=last)
        .map(|i| {
            if last < 2 {
                (nv[last] - nv[0]) / (last as f64 * dx)
            } else if i == 0 {
                (-3.0 * nv[0] + 4.0 * nv[1] - nv[2]) / (2.0 * dx)
            } else if i == last {
                (3.0 * nv[last] - 4.0 * nv[last - 1] + nv[last - 2]) / (2.0 * dx)
            } else {
                (nv[i + 1] - nv[i - 1]) / (2.0 * dx)
            }
        })
        .collect();
    GridFunction::new(*n.grid(), values).expect("same length")
}

/// Right-hand side of the unregularized method.
pub fn brute_rhs(n_eps: &GridFunction, lambda: f64) -> GridFunction {
    let d = central_derivative(n_eps);
    GridFunction::new(
        *n_eps.grid(),
        d.values().iter().zip(n_eps.values()).map(|(d, n)| d + lambda * n).collect(),
    )
    .expect("same length")
}

/// No regularization: `alpha` is ignored and recorded as zero.
pub fn solve_brute(n_eps: &GridFunction, cfg: &InverseConfig) -> Result<InverseResult> {
    let cfg = InverseConfig { alpha: 0.0, ..*cfg };
    cfg.validate()?;
    let lambda = cfg.lambda(|| lambda_ratio_plain(n_eps))?;
    let l = brute_rhs(n_eps, lambda.value);
    let h = quasi_reversible_sweep(&l, 0.0);
    finish(Method::Brute, h, l, lambda, n_eps, &cfg)
}

pub fn solve_mixed(n_eps: &GridFunction, cfg: &InverseConfig) -> Result<InverseResult> {
    cfg.validate()?;
    let smoothed = mollify(n_eps, cfg.alpha);
    let dn = regularized_derivative(n_eps, cfg.alpha);
    let lambda = cfg.lambda(|| lambda_ratio_mixed(&smoothed, cfg.alpha))?;
    let l = GridFunction::new(
        *n_eps.grid(),
        dn.values().iter().zip(smoothed.values()).map(|(d, n)| d + lambda.value * n).collect(),
    )?;
    let h = quasi_reversible_sweep(&l, cfg.alpha);
    finish(Method::Mixed, h, l, lambda, n_eps, cfg)
}

pub fn solve(method: Method, n_eps: &GridFunction, cfg: &InverseConfig) -> Result<InverseResult> {
    match method {
        Method::Brute => solve_brute(n_eps, cfg),
        Method::Filter => solve_filter(n_eps, cfg),
        Method::Qr => solve_qr(n_eps, cfg),
        Method::Mixed => solve_mixed(n_eps, cfg),
    }
}
