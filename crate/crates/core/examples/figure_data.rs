//! Writes reconstruction CSVs for a few representative settings into a
//! directory (default `figures/`).

use std::path::PathBuf;

use divrate::error::{Error, Result};
use divrate::experiments::{run_direct, ExperimentPlan};
use divrate::inverse::{result_to_csv, solve, InverseConfig, Method};
use divrate::metrics::delta_metric;
use divrate::noise::{perturb, NoiseSpec};
use divrate::rate::RateSpec;

struct Case {
    name: &'static str,
    rate: &'static str,
    epsilon: f64,
    alpha: f64,
}

const CASES: [Case; 4] = [
    Case { name: "const_noiseless", rate: "const:1", epsilon: 0.0, alpha: 0.01 },
    Case { name: "jump_noiseless", rate: "jump:1:5:2", epsilon: 0.0, alpha: 0.01 },
    Case { name: "gauss_eps0.01", rate: "gauss-bump:1:1:2:8", epsilon: 0.01, alpha: 0.05 },
    Case { name: "const_eps0.1", rate: "const:1", epsilon: 0.1, alpha: 0.3 },
];

fn main() -> Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
    for case in &CASES {
        let spec = RateSpec::parse(case.rate)?;
        let plan = if case.epsilon == 0.0 {
            ExperimentPlan::noiseless(spec.clone())
        } else {
            ExperimentPlan::noisy(spec.clone())
        };
        let run = run_direct(&plan)?;
        let clean = run.pair.n.resample(&plan.inverse_grid()?)?;
        let n_eps = perturb(&clean, &NoiseSpec::new(case.epsilon, 0)?);
        let b_true = spec.sample(n_eps.grid())?;
        for method in Method::ALL {
            let result = solve(method, &n_eps, &InverseConfig::with_alpha(case.alpha))?;
            let delta = delta_metric(&b_true, &result, &n_eps)?;
            let header = vec![
                format!("b={spec}"),
                format!("method={method}, alpha={}, epsilon={}", result.alpha, case.epsilon),
                format!("delta={delta}"),
            ];
            let path = dir.join(format!("{}_{method}.csv", case.name));
            std::fs::write(&path, result_to_csv(&result, &n_eps, &header)?)
                .map_err(|e| Error::Io { path: path.clone(), source: e })?;
            println!("{}: delta = {delta:.4e}", path.display());
        }
    }
    Ok(())
}
