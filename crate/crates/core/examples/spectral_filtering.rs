//! Spectral mollification of noisy data: derivative error against the
//! regularization parameter.

use divrate::grid::{Grid, GridFunction};
use divrate::noise::{perturb, NoiseSpec};
use divrate::regularization::{mollify, regularized_derivative};

fn main() -> divrate::error::Result<()> {
    let grid = Grid::new(4.0, 2000)?;
    let clean = GridFunction::from_fn(grid, |x| x * x * (-2.0 * x).exp());
    let exact_dn = GridFunction::from_fn(grid, |x| (2.0 * x - 2.0 * x * x) * (-2.0 * x).exp());
    let noisy = perturb(&clean, &NoiseSpec::new(0.01, 7)?);

    // Interior only: the periodic extension is not smooth at the ends.
    let interior = 100..grid.n_points() - 100;
    println!("{:>10} {:>14} {:>14}", "alpha", "|dN_a - dN|", "|N_a - N|");
    for alpha in [0.0, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1] {
        let dn = regularized_derivative(&noisy, alpha);
        let smooth = mollify(&noisy, alpha);
        let d_err = interior.clone().map(|i| (dn.values()[i] - exact_dn.values()[i]).powi(2)).sum::<f64>();
        let s_err = interior.clone().map(|i| (smooth.values()[i] - clean.values()[i]).powi(2)).sum::<f64>();
        println!("{alpha:>10.0e} {:>14.4e} {:>14.4e}", (d_err * grid.dx()).sqrt(), (s_err * grid.dx()).sqrt());
    }
    Ok(())
}
