//! Stable distribution for a constant division rate, checked against the
//! closed-form series.
//!
//! ```text
//! cargo run --release --example direct_constant_rate
//! ```

use divrate::direct::{direct_error_l1, exact_constant_b, solve_eigenpair, DirectConfig};
use divrate::grid::Grid;
use divrate::rate::RateSpec;

fn main() -> divrate::error::Result<()> {
    for intervals in [100, 200, 400, 800, 1600] {
        let grid = Grid::new(8.0, intervals)?;
        let b = RateSpec::Constant(1.0).sample(&grid)?;
        let pair = solve_eigenpair(&b, &DirectConfig::new(grid))?;
        let exact = exact_constant_b(&grid, 1.0, 40)?;
        println!(
            "I = {intervals:>5}  lambda0 = {:.8}  l1 error = {:.4e}  iterations = {}",
            pair.lambda0,
            direct_error_l1(&pair.n, &exact)?,
            pair.iterations
        );
    }
    Ok(())
}
