//! Spectral mollification and the growth-rate estimators used by the inverse
//! solvers.
//!
//! The mollifier is defined through its Fourier transform
//! `rho_hat(xi) = 1 / sqrt(1 + alpha^2 xi^2)`. Data are zero-padded to the
//! next power of two at least twice their length before the DFT, so the
//! implicit periodization does not wrap the right end onto the origin.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierSpec {
    pub alpha: f64,
}

impl MollifierSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn hat(&self, xi: f64) -> f64 {
        mollifier_hat(self.alpha, xi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaVariant {
    /// `int N / int x N`
    RatioPlain,
    /// `sum N / (sum x N + alpha/4 sum N)`
    RatioQr,
    /// `-sum x dN / sum x N`
    RatioFilterDiscrete,
    /// the QR ratio evaluated on mollified data
    RatioMixed,
    /// supplied by the caller
    Override,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaEstimate {
    pub value: f64,
    pub variant: LambdaVariant,
}

impl LambdaEstimate {
    pub fn is_admissible(&self) -> bool {
        self.value > 0.0 && self.value.is_finite()
    }
}

#[inline]
pub fn mollifier_hat(alpha: f64, xi: f64) -> f64 {
    1.0 / (1.0 + alpha * alpha * xi * xi).sqrt()
}

/// Angular frequency of DFT mode `k` for a length-`m` signal with spacing `dx`.
/// The Nyquist mode (even `m`, `k = m/2`) reports zero.
pub fn mode_frequency(k: usize, m: usize, dx: f64) -> f64 {
    let scale = 2.0 * PI / (m as f64 * dx);
    if 2 * k < m {
        scale * k as f64
    } else if 2 * k > m {
        scale * (k as f64 - m as f64)
    } else {
        0.0
    }
}

/// Length of the zero-padded transform for `n` samples.
pub fn padded_len(n: usize) -> usize {
    (2 * n).next_power_of_two()
}

/// Applies a Fourier multiplier to `values`, treated as one period of a
/// periodic signal. The Nyquist mode is dropped when `drop_nyquist` is set.
fn apply_multiplier(
    values: &[f64],
    dx: f64,
    multiplier: impl Fn(f64) -> Complex64,
    drop_nyquist: bool,
) -> Vec<f64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        if drop_nyquist && 2 * k == m {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= multiplier(mode_frequency(k, m, dx));
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let inv = 1.0 / m as f64;
    debug_assert!({
        let scale = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        buf.iter().all(|c| c.im.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE))
    });
    buf.iter().map(|c| c.re * inv).collect()
}

/// Regularized spectral derivative of periodic samples (no padding).
pub fn periodic_derivative(values: &[f64], dx: f64, alpha: f64) -> Vec<f64> {
    apply_multiplier(values, dx, |xi| Complex64::new(0.0, xi * mollifier_hat(alpha, xi)), true)
}

/// Convolution with the mollifier of periodic samples (no padding).
pub fn periodic_mollify(values: &[f64], dx: f64, alpha: f64) -> Vec<f64> {
    apply_multiplier(values, dx, |xi| Complex64::new(mollifier_hat(alpha, xi), 0.0), false)
}

fn padded(n: &GridFunction) -> Vec<f64> {
    let mut buf = n.values().to_vec();
    buf.resize(padded_len(n.len()), 0.0);
    buf
}

/// `dN_alpha`: the derivative of `N * rho_alpha`, computed spectrally on the
/// zero-padded data, with `dN_alpha(0) = 0` imposed.
pub fn regularized_derivative(n: &GridFunction, alpha: f64) -> GridFunction {
    let mut out = periodic_derivative(&padded(n), n.grid().dx(), alpha);
    out.truncate(n.len());
    out[0] = 0.0;
    GridFunction::new(*n.grid(), out).expect("length preserved")
}

/// `N * rho_alpha` on the zero-padded data.
pub fn mollify(n: &GridFunction, alpha: f64) -> GridFunction {
    let mut out = periodic_mollify(&padded(n), n.grid().dx(), alpha);
    out.truncate(n.len());
    GridFunction::new(*n.grid(), out).expect("length preserved")
}

fn ratio(num: f64, den: f64, variant: LambdaVariant, what: &'static str) -> Result<LambdaEstimate> {
    if !(den > 0.0) {
        return Err(Error::Degenerate(what));
    }
    Ok(LambdaEstimate { value: num / den, variant })
}

pub fn lambda_ratio_plain(n: &GridFunction) -> Result<LambdaEstimate> {
    ratio(n.integrate(), n.integrate_x(), LambdaVariant::RatioPlain, "first moment of N is not positive")
}

pub fn lambda_ratio_qr(n: &GridFunction, alpha: f64) -> Result<LambdaEstimate> {
    let mass = n.integrate();
    ratio(
        mass,
        n.integrate_x() + 0.25 * alpha * mass,
        LambdaVariant::RatioQr,
        "quasi-reversibility denominator is not positive",
    )
}

pub fn lambda_ratio_filter(n: &GridFunction, dn_alpha: &GridFunction) -> Result<LambdaEstimate> {
    n.check_same_grid(dn_alpha, "data and its derivative")?;
    ratio(
        -dn_alpha.integrate_x(),
        n.integrate_x(),
        LambdaVariant::RatioFilterDiscrete,
        "first moment of N is not positive",
    )
}

pub fn lambda_ratio_mixed(n_smoothed: &GridFunction, alpha: f64) -> Result<LambdaEstimate> {
    let mass = n_smoothed.integrate();
    ratio(
        mass,
        n_smoothed.integrate_x() + 0.25 * alpha * mass,
        LambdaVariant::RatioMixed,
        "mixed-method denominator is not positive",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn mollifier_examples() {
        assert_eq!(mollifier_hat(3.7, 0.0), 1.0);
        assert_eq!(mollifier_hat(0.0, 123.0), 1.0);
        assert!((mollifier_hat(1.0, 1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(MollifierSpec::new(-0.1).is_err());
        assert_eq!(MollifierSpec::new(0.5).unwrap().hat(2.0), mollifier_hat(0.5, 2.0));
    }

    #[test]
    fn frequencies() {
        assert_eq!(mode_frequency(0, 8, 0.5), 0.0);
        assert!((mode_frequency(1, 8, 0.5) - 2.0 * PI / 4.0).abs() < 1e-15);
        assert!((mode_frequency(7, 8, 0.5) + 2.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(mode_frequency(4, 8, 0.5), 0.0);
        assert_eq!(padded_len(401), 1024);
        assert_eq!(padded_len(512), 1024);
    }

    #[test]
    fn sine_derivative_sign_and_accuracy() {
        let n = 64;
        let period = 4.0;
        let dx = period / n as f64;
        let w = 2.0 * PI / period;
        let vals: Vec<f64> = (0..n).map(|i| (w * i as f64 * dx).sin()).collect();
        let d = periodic_derivative(&vals, dx, 0.0);
        for (i, v) in d.iter().enumerate() {
            assert!((v - w * (w * i as f64 * dx).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_data() {
        let g = Grid::new(4.0, 100).unwrap();
        let z = GridFunction::zeros(g);
        assert!(regularized_derivative(&z, 0.1).values().iter().all(|&v| v == 0.0));
        assert!(mollify(&z, 0.1).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivative_of_bump_and_origin_value() {
        let g = Grid::new(8.0, 800).unwrap();
        let bump = GridFunction::from_fn(g, |x| (-(x - 3.0).powi(2) * 4.0).exp());
        let d = regularized_derivative(&bump, 0.0);
        assert_eq!(d.values()[0], 0.0);
        for (x, v) in g.nodes().zip(d.values()).skip(1) {
            let exact = -8.0 * (x - 3.0) * (-(x - 3.0).powi(2) * 4.0).exp();
            assert!((v - exact).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn mollify_preserves_mass_of_interior_bump() {
        let g = Grid::new(8.0, 800).unwrap();
        let bump = GridFunction::from_fn(g, |x| (-(x - 3.0).powi(2) * 4.0).exp());
        let sm = mollify(&bump, 0.2);
        // the kernel decays like exp(-|x|/alpha); the bump sits 3 units from the origin
        assert!((sm.integrate() - bump.integrate()).abs() < (-3.0f64 / 0.2).exp());
        assert_eq!(mollify(&bump, 0.0).values().len(), bump.len());
        for (a, b) in mollify(&bump, 0.0).values().iter().zip(bump.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn smoothing_bias_is_bounded_by_alpha() {
        // ||d(N * rho) - N'|| <= alpha ||N''|| because |xi (1 - rho_hat)| <= alpha xi^2
        let g = Grid::new(8.0, 800).unwrap();
        let bump = GridFunction::from_fn(g, |x| (-(x - 3.0).powi(2) * 4.0).exp());
        let second = GridFunction::from_fn(g, |x| {
            let s = x - 3.0;
            (64.0 * s * s - 8.0) * (-s * s * 4.0).exp()
        });
        let exact = regularized_derivative(&bump, 0.0);
        let mut errs = Vec::new();
        for alpha in [0.4, 0.2, 0.1, 0.05] {
            let d = regularized_derivative(&bump, alpha);
            let diff = GridFunction::new(
                g,
                d.values().iter().zip(exact.values()).map(|(a, b)| a - b).collect(),
            )
            .unwrap();
            let e = diff.l2_norm();
            assert!(e <= alpha * second.l2_norm(), "alpha = {alpha}: {e}");
            errs.push((alpha, e));
        }
        let slope = (errs[0].1 / errs[3].1).ln() / (errs[0].0 / errs[3].0).ln();
        assert!(slope >= 1.0, "slope {slope}");
    }

    #[test]
    fn lambda_plain_examples() {
        let g = Grid::new(40.0, 40_000).unwrap();
        let e1 = GridFunction::from_fn(g, |x| (-x).exp());
        let e2 = GridFunction::from_fn(g, |x| (-2.0 * x).exp());
        assert!((lambda_ratio_plain(&e1).unwrap().value - 1.0).abs() < 2e-3);
        assert!((lambda_ratio_plain(&e2).unwrap().value - 2.0).abs() < 5e-3);
        assert!(lambda_ratio_plain(&GridFunction::zeros(g)).is_err());
    }

    #[test]
    fn lambda_qr_examples() {
        let g = Grid::new(40.0, 40_000).unwrap();
        let e1 = GridFunction::from_fn(g, |x| (-x).exp());
        assert_eq!(lambda_ratio_qr(&e1, 0.0).unwrap().value, lambda_ratio_plain(&e1).unwrap().value);
        assert!((lambda_ratio_qr(&e1, 4.0).unwrap().value - 0.5).abs() < 1e-3);
        let mut prev = 0.0;
        for alpha in [1.0, 0.5, 0.1, 0.01, 0.0] {
            let v = lambda_ratio_qr(&e1, alpha).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn lambda_filter_examples() {
        let g = Grid::new(40.0, 40_000).unwrap();
        let e1 = GridFunction::from_fn(g, |x| (-x).exp());
        let de1 = GridFunction::from_fn(g, |x| -(-x).exp());
        assert!((lambda_ratio_filter(&e1, &de1).unwrap().value - 1.0).abs() < 1e-12);
        let z = lambda_ratio_filter(&e1, &GridFunction::zeros(g)).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(!z.is_admissible());
        assert!(lambda_ratio_filter(&GridFunction::zeros(g), &de1).is_err());
    }

    #[test]
    fn lambda_mixed_examples() {
        let g = Grid::new(40.0, 40_000).unwrap();
        let e1 = GridFunction::from_fn(g, |x| (-x).exp());
        let e2 = GridFunction::from_fn(g, |x| (-2.0 * x).exp());
        assert!((lambda_ratio_mixed(&e1, 0.0).unwrap().value - 1.0).abs() < 2e-3);
        assert!((lambda_ratio_mixed(&e2, 0.0).unwrap().value - 2.0).abs() < 5e-3);
        assert_eq!(lambda_ratio_mixed(&e1, 0.3).unwrap().value, lambda_ratio_qr(&e1, 0.3).unwrap().value);
    }

    #[test]
    fn estimators_are_scale_invariant() {
        let g = Grid::new(8.0, 400).unwrap();
        let n = GridFunction::from_fn(g, |x| x * (-x).exp());
        let dn = regularized_derivative(&n, 0.05);
        for c in [0.5, 3.0] {
            let (nc, dnc) = (n.scaled(c), dn.scaled(c));
            let pairs = [
                (lambda_ratio_plain(&n).unwrap().value, lambda_ratio_plain(&nc).unwrap().value),
                (lambda_ratio_qr(&n, 0.1).unwrap().value, lambda_ratio_qr(&nc, 0.1).unwrap().value),
                (lambda_ratio_filter(&n, &dn).unwrap().value, lambda_ratio_filter(&nc, &dnc).unwrap().value),
                (lambda_ratio_mixed(&n, 0.1).unwrap().value, lambda_ratio_mixed(&nc, 0.1).unwrap().value),
            ];
            for (a, b) in pairs {
                assert!((a - b).abs() <= 1e-14 * a.abs());
            }
        }
    }
}
