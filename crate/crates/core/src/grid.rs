//! Uniform 1-D meshes and node-sampled functions.
//!
//! Every solver in the crate works on a [`Grid`] with nodes `x_i = i * dx`,
//! `0 <= i <= I`, and exchanges data as [`GridFunction`]s. Integrals use the
//! left-rectangle rule `dx * sum(f_i)`, matching cell-average sampling.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Uniform mesh on `[0, x_max]` with `intervals + 1` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    x_max: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(x_max: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidGrid("need at least one interval".into()));
        }
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::InvalidGrid(format!("x_max must be positive, got {x_max}")));
        }
        Ok(Self { x_max, intervals })
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of intervals `I`.
    #[inline]
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.intervals + 1
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.x_max / self.intervals as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.x_max
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points()).map(move |i| self.node(i))
    }

    /// Two grids are compatible when they have the same node count and spacing.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.intervals == other.intervals
            && (self.x_max - other.x_max).abs() <= 1e-12 * self.x_max.max(other.x_max)
    }
}

/// Real values sampled at the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.n_points()] }
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(f64) -> f64) -> Self {
        Self { grid, values: grid.nodes().map(f).collect() }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub(crate) fn check_same_grid(&self, other: &GridFunction, what: &'static str) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(what))
        }
    }

    /// `dx * sum_i f_i`.
    pub fn integrate(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    /// `dx * sum_i x_i f_i`.
    pub fn integrate_x(&self) -> f64 {
        let grid = self.grid;
        grid.dx() * self.values.iter().enumerate().map(|(i, v)| grid.node(i) * v).sum::<f64>()
    }

    /// `sqrt(dx * sum_i f_i^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Piecewise-linear interpolation onto `target`, which must lie inside this
    /// function's domain.
    pub fn resample(&self, target: &Grid) -> Result<GridFunction> {
        let source = self.grid;
        if target.x_max() > source.x_max() * (1.0 + 1e-12) {
            return Err(Error::DomainExceeded { target: target.x_max(), available: source.x_max() });
        }
        let dx = source.dx();
        let last = source.intervals();
        let values = target
            .nodes()
            .map(|x| {
                let mut s = x / dx;
                if (s - s.round()).abs() < 1e-9 {
                    s = s.round();
                }
                let j = (s.floor() as usize).min(last - 1);
                let t = (s - j as f64).clamp(0.0, 1.0);
                let (a, b) = (self.values[j], self.values[j + 1]);
                if t == 0.0 {
                    a
                } else if t == 1.0 {
                    b
                } else {
                    a + t * (b - a)
                }
            })
            .collect();
        Ok(GridFunction { grid: *target, values })
    }

    /// Value at the half index `i/2`: `f_{i/2}` for even `i`, the average of the
    /// two neighbours for odd `i`.
    pub fn half_index_value(&self, i: usize) -> Result<f64> {
        if i >= self.values.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.values.len() });
        }
        Ok(half_index(&self.values, i))
    }

    /// Two-column `x,value` CSV with full double precision.
    pub fn to_csv(&self, header_comments: &[String]) -> String {
        let mut out = String::new();
        for line in header_comments {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("x,value\n");
        for (x, v) in self.grid.nodes().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(*v));
        }
        out
    }

    pub fn write_csv(&self, path: &Path, header_comments: &[String]) -> Result<()> {
        fs::write(path, self.to_csv(header_comments)).map_err(|e| Error::io(path, e))
    }

    /// Parses CSV whose first two columns are `x` and a value. Comment lines
    /// (`#`) and a non-numeric header are skipped; the nodes must be uniform
    /// and start at zero.
    pub fn from_csv(text: &str) -> Result<GridFunction> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(parse_err(format!("expected two columns in line `{line}`")));
            };
            let (Ok(x), Ok(v)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) else {
                if xs.is_empty() {
                    continue; // header row
                }
                return Err(parse_err(format!("non-numeric row `{line}`")));
            };
            xs.push(x);
            vs.push(v);
        }
        if xs.len() < 2 {
            return Err(parse_err("need at least two rows".into()));
        }
        if xs[0].abs() > 1e-12 {
            return Err(parse_err(format!("first node must be 0, got {}", xs[0])));
        }
        let x_max = *xs.last().unwrap();
        let grid = Grid::new(x_max, xs.len() - 1)?;
        let tol = 1e-9 * grid.dx().max(1.0);
        if let Some((i, x)) = xs.iter().enumerate().find(|(i, x)| (grid.node(*i) - **x).abs() > tol) {
            return Err(parse_err(format!("non-uniform node {x} at row {i}")));
        }
        GridFunction::new(grid, vs)
    }

    pub fn read_csv(path: &Path) -> Result<GridFunction> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

fn parse_err(detail: String) -> Error {
    Error::Parse { what: "grid function csv", detail }
}

/// Half-index rule on a raw slice. `i` must be a valid index.
#[inline]
pub(crate) fn half_index(values: &[f64], i: usize) -> f64 {
    if i % 2 == 0 {
        values[i / 2]
    } else {
        0.5 * (values[(i - 1) / 2] + values[(i + 1) / 2])
    }
}

/// Formats with 17 significant digits so values round-trip exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(x_max: f64, intervals: usize) -> Grid {
        Grid::new(x_max, intervals).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = grid(4.0, 7);
        assert_eq!(g.n_points(), 8);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(7), 4.0);
        assert!(Grid::new(4.0, 0).is_err());
        assert!(Grid::new(-1.0, 4).is_err());
        assert!(Grid::new(f64::NAN, 4).is_err());
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(GridFunction::zeros(grid(3.0, 10)).integrate(), 0.0);
        let ones = GridFunction::from_fn(grid(4.0, 4), |_| 1.0);
        assert_eq!(ones.integrate(), 5.0);
        let g = grid(40.0, 4000);
        let e = GridFunction::from_fn(g, |x| (-x).exp());
        assert!((e.integrate() - 1.0).abs() < 1e-2);
        assert!((e.integrate_x() - 1.0).abs() < 2e-2);
    }

    #[test]
    fn integrate_x_spike() {
        let g = grid(10.0, 100);
        let mut f = GridFunction::zeros(g);
        f.values_mut()[37] = 1.0 / g.dx();
        assert!((f.integrate_x() - g.node(37)).abs() < 1e-12);
        assert_eq!(GridFunction::zeros(g).integrate_x(), 0.0);
    }

    #[test]
    fn integrate_is_linear() {
        let g = grid(5.0, 200);
        let f = GridFunction::from_fn(g, |x| x.sin());
        let h = GridFunction::from_fn(g, |x| (x * 0.3).exp());
        let (a, b) = (2.5, -0.75);
        let combo = GridFunction::new(
            g,
            f.values().iter().zip(h.values()).map(|(p, q)| a * p + b * q).collect(),
        )
        .unwrap();
        let lhs = combo.integrate();
        let rhs = a * f.integrate() + b * h.integrate();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn resample_identity_linear_and_constant() {
        let g = grid(2.0, 20);
        let f = GridFunction::from_fn(g, |x| x.cos());
        assert_eq!(f.resample(&g).unwrap().values(), f.values());

        let lin = GridFunction::from_fn(g, |x| 2.0 * x);
        let fine = grid(2.0, 137);
        let r = lin.resample(&fine).unwrap();
        for (x, v) in fine.nodes().zip(r.values()) {
            assert!((v - 2.0 * x).abs() < 1e-13);
        }

        let c = GridFunction::from_fn(g, |_| 3.25);
        let r = c.resample(&grid(1.3, 77)).unwrap();
        assert!(r.values().iter().all(|&v| v == 3.25));
    }

    #[test]
    fn resample_interpolation_bound() {
        let coarse = grid(4.0, 40);
        let f = GridFunction::from_fn(coarse, |x| (-x).exp());
        let fine = grid(4.0, 400);
        let r = f.resample(&fine).unwrap();
        // |f''| <= 1 on [0, 4]
        let bound = coarse.dx().powi(2) / 8.0;
        let err = fine
            .nodes()
            .zip(r.values())
            .map(|(x, v)| (v - (-x).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err <= bound * (1.0 + 1e-9), "err {err} > {bound}");
    }

    #[test]
    fn resample_rejects_larger_domain() {
        let f = GridFunction::zeros(grid(4.0, 40));
        assert!(matches!(f.resample(&grid(4.5, 40)), Err(Error::DomainExceeded { .. })));
    }

    #[test]
    fn half_index_examples() {
        let f = GridFunction::from_fn(grid(10.0, 10), |x| x);
        assert_eq!(f.half_index_value(4).unwrap(), 2.0);
        assert_eq!(f.half_index_value(3).unwrap(), 1.5);
        assert_eq!(f.half_index_value(0).unwrap(), 0.0);
        assert!(matches!(f.half_index_value(11), Err(Error::IndexOutOfRange { .. })));
        for i in (0..=10).step_by(2) {
            assert_eq!(f.half_index_value(i).unwrap(), f.values()[i / 2]);
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(3.0, 30);
        let f = GridFunction::from_fn(g, |x| (x * 1.7).sin() / 3.0);
        let text = f.to_csv(&["b=const:1".to_string()]);
        assert!(text.starts_with("# b=const:1\nx,value\n"));
        let back = GridFunction::from_csv(&text).unwrap();
        assert_eq!(back.values(), f.values());
        assert!(back.grid().same_as(&g));
    }

    #[test]
    fn csv_rejects_nonuniform() {
        let text = "x,value\n0,1\n0.5,2\n1.5,3\n";
        assert!(GridFunction::from_csv(text).is_err());
    }
}
