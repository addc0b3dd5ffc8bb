//! Stable distributions for the three builtin division rates.
//!
//! Pass a directory to also write one CSV per rate:
//!
//! ```text
//! cargo run --release --example direct_three_rates -- out/
//! ```

use std::path::PathBuf;

use divrate::direct::{solve_eigenpair, DirectConfig};
use divrate::experiments::{direct_header, TailCheck};
use divrate::grid::Grid;
use divrate::rate::RateSpec;

fn main() -> divrate::error::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let grid = Grid::new(8.0, 800)?;
    let cfg = DirectConfig::new(grid);
    for spec in RateSpec::builtin_trio() {
        let pair = solve_eigenpair(&spec.sample(&grid)?, &cfg)?;
        let tail = TailCheck::measure(&pair.n, 4.0);
        println!(
            "{:<28} lambda0 = {:.6}  peak = {:.4}  tail mass beyond 4 = {:.3e}",
            spec.to_string(),
            pair.lambda0,
            pair.n.max_value(),
            tail.mass
        );
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir).map_err(|e| divrate::error::Error::Io { path: dir.clone(), source: e })?;
            let name: String =
                spec.to_string().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
            let mut header = vec![format!("b={spec}")];
            header.extend(direct_header(&pair, &cfg));
            pair.n.write_csv(&dir.join(format!("direct_{name}.csv")), &header)?;
        }
    }
    Ok(())
}
