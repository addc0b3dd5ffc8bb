//! Convergence rate of the minimal error as the noise level shrinks, with the
//! growth rate estimated from the data and with the exact one.

use divrate::experiments::{run_convergence, run_direct, run_sweep, ExperimentPlan};
use divrate::inverse::Method;
use divrate::rate::RateSpec;

fn main() -> divrate::error::Result<()> {
    let mut plan = ExperimentPlan::noisy(RateSpec::Constant(1.0));
    plan.epsilons = vec![0.01, 0.02, 0.05, 0.1];
    plan.methods = vec![Method::Filter, Method::Qr, Method::Mixed];
    let run = run_direct(&plan)?;

    let mut records = run_sweep(&plan, &run)?;
    plan.use_exact_lambda = true;
    records.extend(run_sweep(&plan, &run)?);

    for fit in run_convergence(&records)? {
        let lambda = if fit.exact_lambda { "exact" } else { "estimated" };
        let alpha_slope = fit.alpha_fit.map_or("-".to_string(), |f| format!("{:.3}", f.slope));
        println!(
            "{:<7} lambda {lambda:<9} delta slope = {:.3}  alpha slope = {alpha_slope}",
            fit.method.to_string(),
            fit.delta_fit.slope
        );
        for p in &fit.points {
            println!("    eps = {:<5} min delta = {:.4e} at alpha = {:.3e}", p.epsilon, p.min_delta, p.argmin_alpha);
        }
    }
    Ok(())
}
