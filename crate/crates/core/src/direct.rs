//! Stable size distribution and Malthus parameter of the cell-division
//! equation `dN/dx + (lambda + B) N = 4 B(2x) N(2x)`.
//!
//! The eigenpair is extracted by marching the time-dependent problem with an
//! upwind finite-volume step (transport explicit, loss implicit, birth term
//! explicit) and renormalizing after every step.

use log::debug;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

#[derive(Clone, Copy, Debug)]
pub struct DirectConfig {
    pub grid: Grid,
    /// CFL ratio `dt / dx`.
    pub theta: f64,
    pub stop_tol: f64,
    pub max_iters: usize,
}

impl DirectConfig {
    pub fn new(grid: Grid) -> Self {
        Self { grid, theta: 1.0, stop_tol: 1e-10, max_iters: 2_000_000 }
    }

    pub fn dt(&self) -> f64 {
        self.theta * self.grid.dx()
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.stop_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("stop_tol must be positive, got {}", self.stop_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Stable distribution, normalized to `dx * sum N_i = 1`.
    pub n: GridFunction,
    /// Malthus parameter, `integrate(N) / integrate_x(N)`.
    pub lambda0: f64,
    /// `ln(growth_factor) / dt` at the final step. Carries an `O(dt)` splitting
    /// bias relative to `lambda0`.
    pub lambda_log_ratio: f64,
    /// Pre-normalization growth factor of the final step.
    pub growth_factor: f64,
    pub iterations: usize,
    pub final_residual: f64,
}

/// Birth term `B_{2i-1} n_{2i-1} + 2 B_{2i} n_{2i} + B_{2i+1} n_{2i+1}` with
/// zero extension beyond the last node.
fn birth_term(n: &[f64], b: &[f64], i: usize) -> f64 {
    let last = n.len() - 1;
    let bn = |j: usize| if j <= last { b[j] * n[j] } else { 0.0 };
    bn(2 * i - 1) + 2.0 * bn(2 * i) + bn(2 * i + 1)
}

fn check_rate(b: &GridFunction) -> Result<()> {
    match b.values().iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        Some((index, &value)) => Err(Error::NegativeRate { index, value }),
        None => Ok(()),
    }
}

fn step_into(n: &[f64], b: &[f64], theta: f64, dt: f64, out: &mut [f64]) {
    out[0] = 0.0;
    for i in 1..n.len() {
        let explicit = n[i] - theta * (n[i] - n[i - 1]) + dt * birth_term(n, b, i);
        out[i] = explicit / (1.0 + dt * b[i]);
    }
}

/// One time step of the upwind scheme.
pub fn direct_step(n: &GridFunction, b: &GridFunction, cfg: &DirectConfig) -> Result<GridFunction> {
    cfg.validate()?;
    n.check_same_grid(b, "density and division rate")?;
    if !n.grid().same_as(&cfg.grid) {
        return Err(Error::GridMismatch("density and solver config"));
    }
    check_rate(b)?;
    let mut out = vec![0.0; n.len()];
    step_into(n.values(), b.values(), cfg.theta, cfg.dt(), &mut out);
    GridFunction::new(*n.grid(), out)
}

/// Power iteration on the time-marching operator.
///
/// Stops once both the change of the growth rate and the `l1` change of the
/// normalized iterate, each per unit time, fall below `cfg.stop_tol`.
pub fn solve_eigenpair(b: &GridFunction, cfg: &DirectConfig) -> Result<EigenPair> {
    cfg.validate()?;
    if !b.grid().same_as(&cfg.grid) {
        return Err(Error::GridMismatch("division rate and solver config"));
    }
    check_rate(b)?;
    if b.values()[1..].iter().all(|&v| v == 0.0) {
        return Err(Error::NoConvergence { iterations: 0, residual: f64::INFINITY });
    }

    let grid = cfg.grid;
    let dx = grid.dx();
    let dt = cfg.dt();
    let bv = b.values();

    let mut n: Vec<f64> = grid.nodes().map(|x| x * (-x).exp()).collect();
    let mass: f64 = dx * n.iter().sum::<f64>();
    n.iter_mut().for_each(|v| *v /= mass);
    let mut next = vec![0.0; n.len()];

    let mut lambda_prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_iters {
        step_into(&n, bv, cfg.theta, dt, &mut next);
        let s_old: f64 = n.iter().sum();
        let s_new: f64 = next.iter().sum();
        if !(s_new > 0.0 && s_new.is_finite()) {
            return Err(Error::NoConvergence { iterations: iter, residual });
        }
        let growth = s_new / s_old;
        let lambda = growth.ln() / dt;
        let scale = 1.0 / (dx * s_new);
        let mut change = 0.0;
        for (m, v) in next.iter_mut().zip(&n) {
            *m *= scale;
            change += (*m - v).abs();
        }
        std::mem::swap(&mut n, &mut next);
        residual = ((lambda - lambda_prev).abs()).max(dx * change / dt);
        lambda_prev = lambda;
        if residual < cfg.stop_tol {
            let n = GridFunction::new(grid, n)?;
            let lambda0 = n.integrate() / n.integrate_x();
            debug!("power iteration converged after {iter} steps, lambda0 = {lambda0}, log-ratio {lambda}");
            return Ok(EigenPair {
                n,
                lambda0,
                lambda_log_ratio: lambda,
                growth_factor: growth,
                iterations: iter,
                final_residual: residual,
            });
        }
    }
    Err(Error::NoConvergence { iterations: cfg.max_iters, residual })
}

/// Residual of the discrete eigen-relation solved by the power iteration,
/// `(g - 1)/dt N_i + theta (N_i - N_{i-1})/dt + g B_i N_i - birth_i`, in `l2`.
pub fn scheme_residual(pair: &EigenPair, b: &GridFunction, cfg: &DirectConfig) -> f64 {
    let n = pair.n.values();
    let bv = b.values();
    let g = pair.growth_factor;
    let dt = cfg.dt();
    (1..n.len())
        .map(|i| {
            let r = (g - 1.0) / dt * n[i] + cfg.theta * (n[i] - n[i - 1]) / dt + g * bv[i] * n[i]
                - birth_term(n, bv, i);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Residual of the limit system `(N_i - N_{i-1})/dx + (lambda + B_i) N_i = birth_i`
/// with the supplied `lambda`, in `l2`.
pub fn stationary_residual(n: &GridFunction, b: &GridFunction, lambda: f64) -> f64 {
    let nv = n.values();
    let bv = b.values();
    let dx = n.grid().dx();
    (1..nv.len())
        .map(|i| {
            let r = (nv[i] - nv[i - 1]) / dx + (lambda + bv[i]) * nv[i] - birth_term(nv, bv, i);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Coefficients of the exponential series solving the constant-rate problem,
/// `a_0 = 1`, `a_n = -2 a_{n-1} / (2^n - 1)`.
pub fn exact_series_coefficients(n_terms: usize) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(n_terms);
    let mut a = 1.0;
    for n in 0..n_terms {
        if n > 0 {
            a = -2.0 * a / ((2.0f64).powi(n as i32) - 1.0);
        }
        if a.abs() < 1e-16 {
            break;
        }
        coeffs.push(a);
    }
    coeffs
}

/// Unnormalized exact profile for constant `B`:
/// `sum_n a_n exp(-2^{n+1} B x)` (the eigenvalue is `B`).
pub fn exact_constant_profile(b: f64, x: f64, coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| a * (-(2.0f64).powi(n as i32 + 1) * b * x).exp())
        .sum()
}

/// Exact stable distribution for constant `B`, normalized to unit discrete mass.
pub fn exact_constant_b(grid: &Grid, b: f64, n_terms: usize) -> Result<GridFunction> {
    if !(b > 0.0) || n_terms == 0 {
        return Err(Error::InvalidArgument(format!(
            "need B > 0 and at least one term (B = {b}, n_terms = {n_terms})"
        )));
    }
    let coeffs = exact_series_coefficients(n_terms);
    let raw = GridFunction::from_fn(*grid, |x| exact_constant_profile(b, x, &coeffs));
    let mass = raw.integrate();
    Ok(raw.scaled(1.0 / mass))
}

/// Relative `l1` distance `sum |N - N_exact| / sum |N_exact|`.
pub fn direct_error_l1(n: &GridFunction, exact: &GridFunction) -> Result<f64> {
    n.check_same_grid(exact, "computed and exact distributions")?;
    let denom: f64 = exact.values().iter().map(|v| v.abs()).sum();
    if denom == 0.0 {
        return Err(Error::Degenerate("exact distribution is identically zero"));
    }
    let num: f64 = n.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).sum();
    Ok(num / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(x_max: f64, intervals: usize) -> DirectConfig {
        DirectConfig::new(Grid::new(x_max, intervals).unwrap())
    }

    #[test]
    fn zero_is_fixed_point() {
        let c = cfg(4.0, 40);
        let n = GridFunction::zeros(c.grid);
        let b = GridFunction::from_fn(c.grid, |_| 1.0);
        let out = direct_step(&n, &b, &c).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pure_transport_is_exact_shift() {
        let c = cfg(4.0, 40);
        let n = GridFunction::from_fn(c.grid, |x| x * (3.0 - x).max(0.0));
        let b = GridFunction::zeros(c.grid);
        let out = direct_step(&n, &b, &c).unwrap();
        assert_eq!(out.values()[0], 0.0);
        for i in 1..out.len() {
            assert_eq!(out.values()[i], n.values()[i - 1]);
        }
    }

    #[test]
    fn single_spike_step_by_hand() {
        // dx = dt = 0.1, B = 1, spike at j
        let c = cfg(2.0, 20);
        let dt = c.dt();
        let b = GridFunction::from_fn(c.grid, |_| 1.0);
        for j in [7usize, 8] {
            let mut n = GridFunction::zeros(c.grid);
            n.values_mut()[j] = 1.0;
            let out = direct_step(&n, &b, &c).unwrap();
            let mut expected = vec![0.0; 21];
            // transport moves the spike one cell right
            expected[j + 1] += 1.0 / (1.0 + dt);
            if j % 2 == 0 {
                expected[j / 2] += 2.0 * dt / (1.0 + dt);
            } else {
                expected[(j - 1) / 2] += dt / (1.0 + dt);
                expected[(j + 1) / 2] += dt / (1.0 + dt);
            }
            for (a, e) in out.values().iter().zip(&expected) {
                assert!((a - e).abs() < 1e-15, "spike {j}: {:?}", out.values());
            }
            // node ceil(j/2) always receives birth mass
            assert!(out.values()[j.div_ceil(2)] > 0.0);
        }
    }

    #[test]
    fn step_errors() {
        let c = cfg(4.0, 40);
        let n = GridFunction::zeros(c.grid);
        let mut b = GridFunction::from_fn(c.grid, |_| 1.0);
        b.values_mut()[3] = -0.5;
        assert!(matches!(direct_step(&n, &b, &c), Err(Error::NegativeRate { index: 3, .. })));
        let other = GridFunction::zeros(Grid::new(4.0, 41).unwrap());
        assert!(matches!(direct_step(&other, &b, &c), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn zero_rate_cannot_converge() {
        let c = cfg(4.0, 40);
        let b = GridFunction::zeros(c.grid);
        assert!(matches!(solve_eigenpair(&b, &c), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn max_iters_reports_residual() {
        let mut c = cfg(8.0, 200);
        c.max_iters = 5;
        let b = GridFunction::from_fn(c.grid, |_| 1.0);
        match solve_eigenpair(&b, &c) {
            Err(Error::NoConvergence { iterations: 5, residual }) => assert!(residual.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_rate_eigenpair() {
        let c = cfg(8.0, 800);
        let b = GridFunction::from_fn(c.grid, |_| 1.0);
        let pair = solve_eigenpair(&b, &c).unwrap();
        assert!(pair.lambda0 > 0.0);
        assert!((pair.lambda0 - 1.0).abs() < 1e-3, "lambda0 = {}", pair.lambda0);
        // g = (1 + 2h)/(1 + h) up to boundary terms, so ln(g)/h = 1 - 1.5h + O(h^2)
        let h = c.dt();
        assert!((pair.lambda_log_ratio - (1.0 - 1.5 * h)).abs() < 1e-3);
        assert!((pair.n.integrate() - 1.0).abs() < 1e-12);
        assert_eq!(pair.n.values()[0], 0.0);
        assert!(pair.n.values()[1..].iter().all(|&v| v > 0.0));
        let exact = exact_constant_b(&c.grid, 1.0, 30).unwrap();
        let err = direct_error_l1(&pair.n, &exact).unwrap();
        assert!(err < 1.2e-2, "delta_D = {err}");
        assert!(scheme_residual(&pair, &b, &c) <= 10.0 * c.stop_tol);
    }

    #[test]
    fn log_ratio_agrees_with_moment_ratio_for_small_steps() {
        let mut c = cfg(8.0, 800);
        c.theta = 0.05;
        let b = GridFunction::from_fn(c.grid, |_| 1.0);
        let pair = solve_eigenpair(&b, &c).unwrap();
        assert!((pair.lambda_log_ratio - pair.lambda0).abs() < 1e-3);
        assert!(scheme_residual(&pair, &b, &c) <= 10.0 * c.stop_tol);
    }

    #[test]
    fn constant_rate_eigenvector_does_not_depend_on_theta() {
        // for constant B the factor g * B_i in the fixed-point relation is a
        // constant shift, so only the eigenvalue sees dt
        let mut c = cfg(8.0, 200);
        let b = GridFunction::from_fn(c.grid, |_| 1.5);
        let a = solve_eigenpair(&b, &c).unwrap();
        c.theta = 0.5;
        let d = solve_eigenpair(&b, &c).unwrap();
        assert!(direct_error_l1(&a.n, &d.n).unwrap() < 1e-8);
        assert!((a.lambda0 - d.lambda0).abs() < 1e-8);
    }

    #[test]
    fn eigenvalue_scales_with_constant_rate() {
        for rate in [0.5, 2.0] {
            let c = cfg(16.0 / rate, 1600);
            let b = GridFunction::from_fn(c.grid, |_| rate);
            let pair = solve_eigenpair(&b, &c).unwrap();
            assert!((pair.lambda0 / rate - 1.0).abs() < 1e-3, "B = {rate}: {}", pair.lambda0);
        }
    }

    #[test]
    fn series_coefficients() {
        let a = exact_series_coefficients(4);
        assert_eq!(a[0], 1.0);
        assert!((a[1] + 2.0).abs() < 1e-15);
        assert!((a[2] - 4.0 / 3.0).abs() < 1e-15);
        assert!((a[3] + 8.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn exact_profile_properties() {
        let grid = Grid::new(8.0, 800).unwrap();
        let exact = exact_constant_b(&grid, 1.0, 30).unwrap();
        assert!((exact.integrate() - 1.0).abs() < 1e-13);
        let peak = exact.max_value();
        assert!(exact.values()[0].abs() < 1e-10 * peak);
        assert!(exact.values()[1..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn exact_profile_solves_the_ode() {
        // N' + 2B N - 4B N(2x) = 0 checked with the analytic derivative.
        let b = 1.3;
        let coeffs = exact_series_coefficients(40);
        let deriv = |x: f64| -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(n, a)| {
                    let k = (2.0f64).powi(n as i32 + 1) * b;
                    -k * a * (-k * x).exp()
                })
                .sum()
        };
        for k in 1..50 {
            let x = 0.07 * k as f64;
            let n = exact_constant_profile(b, x, &coeffs);
            let n2 = exact_constant_profile(b, 2.0 * x, &coeffs);
            let r = deriv(x) + 2.0 * b * n - 4.0 * b * n2;
            assert!(r.abs() < 1e-12, "x = {x}: residual {r}");
        }
    }

    #[test]
    fn l1_error_examples() {
        let grid = Grid::new(8.0, 80).unwrap();
        let exact = exact_constant_b(&grid, 1.0, 30).unwrap();
        assert_eq!(direct_error_l1(&exact, &exact).unwrap(), 0.0);
        assert!((direct_error_l1(&exact.scaled(2.0), &exact).unwrap() - 1.0).abs() < 1e-14);
        assert!(direct_error_l1(&exact, &GridFunction::zeros(grid)).is_err());
    }
}
