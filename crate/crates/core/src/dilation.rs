//! The dilation equation `4 H(2x) - H(x) = L(x)`.
//!
//! The homogeneous equation has a large kernel (`f(log x) / x^2` for any
//! `log 2`-periodic `f`), so the choice of sweep decides which solution is
//! selected. Sweeping up from zero picks the square-integrable solution
//! `H1(x) = sum_{n>=1} 4^{-n} L(2^{-n} x)`; sweeping down from the right end
//! picks `H2(x) = -sum_{n>=0} 4^n L(2^n x)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{half_index, GridFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    FromZero,
    FromInfinity,
    DenseOracle,
}

#[derive(Clone, Debug)]
pub struct DilationSolution {
    pub h: GridFunction,
    pub strategy: Strategy,
    /// `l2` norm of the residual of the recurrence that produced `h`.
    pub residual_norm: f64,
    /// `L_0` was nonzero and has been replaced by zero.
    pub coerced_origin: bool,
    /// `(H_1, H_2)` for the backward sweep, which should be small a posteriori.
    pub origin_values: Option<(f64, f64)>,
}

/// Residual of `4 H_i - H_{i/2} - L_{i/2}` for `i >= 1`, with `H_0` checked
/// against zero.
pub fn from_zero_residual(h: &[f64], l: &[f64]) -> f64 {
    let mut acc = h[0] * h[0];
    for i in 1..h.len() {
        let r = 4.0 * h[i] - half_index(h, i) - half_index(l, i);
        acc += r * r;
    }
    acc.sqrt()
}

/// Strategy 1: `4 H_i = H_{i/2} + L_{i/2}` for increasing `i`.
pub fn solve_from_zero(l: &GridFunction) -> DilationSolution {
    let mut lv = l.values().to_vec();
    let coerced_origin = lv[0] != 0.0;
    lv[0] = 0.0;
    let n = lv.len();
    let mut h = vec![0.0; n];
    if n > 1 {
        // i = 1 references H_1 through the odd average: (4 - 1/2) H_1 = (H_0 + L_0 + L_1)/2
        h[1] = 0.5 * (h[0] + lv[0] + lv[1]) / 3.5;
    }
    for i in 2..n {
        h[i] = 0.25 * (half_index(&h, i) + half_index(&lv, i));
    }
    let residual_norm = from_zero_residual(&h, &lv);
    DilationSolution {
        h: GridFunction::new(*l.grid(), h).expect("same length"),
        strategy: Strategy::FromZero,
        residual_norm,
        coerced_origin,
        origin_values: None,
    }
}

fn ext(h: &[f64], j: usize) -> f64 {
    h.get(j).copied().unwrap_or(0.0)
}

/// Residual of the backward recurrence `H_i = 2 H_{2i} + H_{2i+1} + H_{2i-1} - L_i`
/// over `2 <= i <= I`.
pub fn from_infinity_residual(h: &[f64], l: &[f64]) -> f64 {
    (2..h.len())
        .map(|i| {
            let r = h[i] - (2.0 * ext(h, 2 * i) + ext(h, 2 * i + 1) + ext(h, 2 * i - 1) - l[i]);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Strategy 2: backward sweep from the right end with `H_j = 0` beyond the
/// grid, closed by `H_0 = 0` and `H_1 = 4 H_2 - L_1`.
pub fn solve_from_infinity(l: &GridFunction) -> DilationSolution {
    let lv = l.values();
    let n = lv.len();
    let mut h = vec![0.0; n];
    for i in (2..n).rev() {
        h[i] = 2.0 * ext(&h, 2 * i) + ext(&h, 2 * i + 1) + ext(&h, 2 * i - 1) - lv[i];
    }
    if n > 2 {
        h[1] = 4.0 * h[2] - lv[1];
    }
    let residual_norm = from_infinity_residual(&h, lv);
    let origin_values = Some((ext(&h, 1), ext(&h, 2)));
    DilationSolution {
        h: GridFunction::new(*l.grid(), h).expect("same length"),
        strategy: Strategy::FromInfinity,
        residual_norm,
        coerced_origin: false,
        origin_values,
    }
}

/// Assembles the strategy-1 equations as a dense system and solves it by LU
/// with partial pivoting.
pub fn solve_dense_oracle(l: &GridFunction) -> Result<DilationSolution> {
    let mut lv = l.values().to_vec();
    let coerced_origin = lv[0] != 0.0;
    lv[0] = 0.0;
    let n = lv.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    a[(0, 0)] = 1.0;
    for i in 1..n {
        a[(i, i)] += 4.0;
        if i % 2 == 0 {
            a[(i, i / 2)] -= 1.0;
        } else {
            a[(i, (i - 1) / 2)] -= 0.5;
            a[(i, i.div_ceil(2))] -= 0.5;
        }
        rhs[i] = half_index(&lv, i);
    }
    let sol = a.lu().solve(&rhs).ok_or(Error::Singular)?;
    let h: Vec<f64> = sol.iter().copied().collect();
    let residual_norm = from_zero_residual(&h, &lv);
    Ok(DilationSolution {
        h: GridFunction::new(*l.grid(), h)?,
        strategy: Strategy::DenseOracle,
        residual_norm,
        coerced_origin,
        origin_values: None,
    })
}

const MAX_SERIES_TERMS: usize = 200;

/// `H1(x) = sum_{n>=1} 4^{-n} L(2^{-n} x)`, summed until an increment drops
/// below `tol`.
pub fn series_h1(l: impl Fn(f64) -> f64, x: f64, tol: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut arg = x;
    for n in 1..=MAX_SERIES_TERMS {
        weight *= 0.25;
        arg *= 0.5;
        let term = weight * l(arg);
        sum += term;
        if term.abs() < tol && n > 1 {
            return Ok(sum);
        }
    }
    Err(Error::SeriesDivergence { terms: MAX_SERIES_TERMS })
}

/// `H2(x) = -sum_{n>=0} 4^n L(2^n x)`. Ten consecutive growing increments
/// are treated as divergence.
pub fn series_h2(l: impl Fn(f64) -> f64, x: f64, tol: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut arg = x;
    let mut prev = f64::INFINITY;
    let mut growing = 0;
    for n in 0..MAX_SERIES_TERMS {
        let term = weight * l(arg);
        if !term.is_finite() {
            return Err(Error::SeriesDivergence { terms: n + 1 });
        }
        sum -= term;
        if term.abs() < tol && n > 0 {
            return Ok(sum);
        }
        if term.abs() > prev {
            growing += 1;
            if growing >= 10 {
                return Err(Error::SeriesDivergence { terms: n + 1 });
            }
        } else {
            growing = 0;
        }
        prev = term.abs();
        weight *= 4.0;
        arg *= 2.0;
    }
    Err(Error::SeriesDivergence { terms: MAX_SERIES_TERMS })
}

/// Element of the homogeneous kernel, `f(log x) / x^2`, for a `log 2`-periodic `f`.
pub fn kernel_witness(f_period: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel witness needs x > 0, got {x}")));
    }
    Ok(f_period(x.ln()) / (x * x))
}
