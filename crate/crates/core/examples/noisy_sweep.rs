//! Full parameter sweep on noisy data: every method, noise level, alpha and
//! seed, reduced to the minimal seed-averaged error per noise level.
//!
//! ```text
//! cargo run --release --example noisy_sweep -- [rate] [sweep.csv]
//! ```

use divrate::experiments::{records_to_csv, run_direct, run_sweep, ExperimentPlan};
use divrate::inverse::Method;
use divrate::metrics::{average_over_seeds, min_over_alpha};
use divrate::rate::RateSpec;

fn main() -> divrate::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let spec = RateSpec::parse(&args.next().unwrap_or_else(|| "const:1".into()))?;
    let out = args.next();

    let plan = ExperimentPlan::noisy(spec);
    let run = run_direct(&plan)?;
    let records = run_sweep(&plan, &run)?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    println!("{} records, {failed} failed", records.len());

    let cells = average_over_seeds(&records);
    for method in Method::ALL {
        for &eps in &plan.epsilons {
            let (delta, alpha) = min_over_alpha(cells.iter().filter(|c| c.method == method), eps)?;
            println!("{:<7} eps = {eps:<5} min delta = {delta:.4e} at alpha = {alpha:.3e}", method.to_string());
        }
    }

    if let Some(path) = out {
        std::fs::write(&path, records_to_csv(&records, &plan.header_lines()))
            .map_err(|e| divrate::error::Error::Io { path: path.into(), source: e })?;
    }
    Ok(())
}
