//! Division-rate recovery from exact data with all four methods.
//!
//! ```text
//! cargo run --release --example noiseless_reconstruction -- [rate] [out.csv]
//! ```
//!
//! The rate defaults to `const:1`. With an output path, the best mixed
//! reconstruction is written as `x,N_eps,H,B`.

use divrate::experiments::{default_alphas, run_direct, ExperimentPlan};
use divrate::inverse::{result_to_csv, solve, InverseConfig, Method};
use divrate::metrics::delta_metric;
use divrate::rate::RateSpec;

fn main() -> divrate::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let spec = RateSpec::parse(&args.next().unwrap_or_else(|| "const:1".into()))?;
    let out = args.next();

    let plan = ExperimentPlan::noiseless(spec.clone());
    let run = run_direct(&plan)?;
    let n = run.pair.n.resample(&plan.inverse_grid()?)?;
    let b_true = spec.sample(n.grid())?;
    println!("{spec}: lambda0 = {:.6}", run.pair.lambda0);

    let mut best_mixed = None;
    for method in Method::ALL {
        let alphas = if method == Method::Brute { vec![0.0] } else { default_alphas() };
        let mut best = (f64::INFINITY, 0.0, None);
        for alpha in alphas {
            let result = solve(method, &n, &InverseConfig::with_alpha(alpha))?;
            let delta = delta_metric(&b_true, &result, &n)?;
            if delta < best.0 {
                best = (delta, alpha, Some(result));
            }
        }
        println!("{:<7} min delta = {:.4e} at alpha = {:.3e}", method.to_string(), best.0, best.1);
        if method == Method::Mixed {
            best_mixed = best.2;
        }
    }

    if let (Some(path), Some(result)) = (out, best_mixed) {
        let text = result_to_csv(&result, &n, &[format!("b={spec}"), format!("alpha={}", result.alpha)])?;
        std::fs::write(&path, text).map_err(|e| divrate::error::Error::Io { path: path.into(), source: e })?;
    }
    Ok(())
}
