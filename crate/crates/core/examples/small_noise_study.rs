//! Minimal error at small noise levels on a finer grid. The filter method is
//! the one of interest here; the others are printed for comparison.

use divrate::experiments::{run_convergence, run_direct, run_sweep, ExperimentPlan};
use divrate::rate::RateSpec;

fn main() -> divrate::error::Result<()> {
    let plan = ExperimentPlan::small_noise(RateSpec::Constant(1.0));
    let run = run_direct(&plan)?;
    let records = run_sweep(&plan, &run)?;
    for fit in run_convergence(&records)? {
        println!("{}: slope {:.3}", fit.method, fit.delta_fit.slope);
        for p in &fit.points {
            println!("    eps = {:.0e}  min delta = {:.4e} at alpha = {:.3e}", p.epsilon, p.min_delta, p.argmin_alpha);
        }
    }
    Ok(())
}
