//! The dilation equation `4 H(2x) - H(x) = L(x)` solved three ways, with the
//! series solution as reference and a kernel element that every strategy
//! misses.

use divrate::dilation::{
    kernel_witness, series_h1, solve_dense_oracle, solve_from_infinity, solve_from_zero, DilationSolution,
};
use divrate::grid::{Grid, GridFunction};

fn max_err(sol: &DilationSolution, reference: &GridFunction) -> f64 {
    sol.h.values().iter().zip(reference.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn main() -> divrate::error::Result<()> {
    let l = |x: f64| x * x * (-x).exp();
    let grid = Grid::new(4.0, 800)?;
    let rhs = GridFunction::from_fn(grid, l);
    let mut reference = Vec::with_capacity(grid.n_points());
    for x in grid.nodes() {
        reference.push(series_h1(l, x, 1e-16)?);
    }
    let reference = GridFunction::new(grid, reference)?;

    // Sweeping down from the right end multiplies the truncation error by 4
    // per halving of x, so that strategy only stays accurate far from 0.
    for sol in [solve_from_zero(&rhs), solve_from_infinity(&rhs), solve_dense_oracle(&rhs)?] {
        println!(
            "{:<14} residual = {:.2e}  max error vs series = {:.3e}",
            format!("{:?}", sol.strategy),
            sol.residual_norm,
            max_err(&sol, &reference)
        );
    }

    let f = |s: f64| (2.0 * std::f64::consts::PI * s / std::f64::consts::LN_2).sin();
    let mut worst: f64 = 0.0;
    for k in 1..=20 {
        let x = 0.25 * k as f64;
        worst = worst.max((4.0 * kernel_witness(f, 2.0 * x)? - kernel_witness(f, x)?).abs());
    }
    println!("kernel element sin(2 pi log2 x) / x^2: max |4K(2x) - K(x)| = {worst:.2e}");
    Ok(())
}
