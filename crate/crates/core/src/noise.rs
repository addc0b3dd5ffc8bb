//! Seeded measurement noise: `N_eps = max(N + eps * r, 0)` with `r` uniform on
//! `[-1/2, 1/2)`.
//!
//! Draws come from ChaCha8 seeded with the 64-bit seed, which produces the
//! same stream on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {epsilon}")));
        }
        Ok(Self { epsilon, seed })
    }
}

/// One draw per node (node 0 included, then reset to zero).
pub fn perturb(n: &GridFunction, spec: &NoiseSpec) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = n.map(|v| {
        let r: f64 = rng.gen::<f64>() - 0.5;
        (v + spec.epsilon * r).max(0.0)
    });
    out.values_mut()[0] = 0.0;
    out
}

/// `||N_eps - N|| / ||N||` in `l2`.
pub fn realized_relative_error(clean: &GridFunction, noisy: &GridFunction) -> f64 {
    let diff: f64 = clean.values().iter().zip(noisy.values()).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = clean.values().iter().map(|v| v * v).sum();
    (diff / norm).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn profile() -> GridFunction {
        GridFunction::from_fn(Grid::new(4.0, 4000).unwrap(), |x| 2.0 * x * (-x).exp())
    }

    #[test]
    fn zero_noise_is_identity() {
        let n = profile();
        let out = perturb(&n, &NoiseSpec::new(0.0, 9).unwrap());
        assert_eq!(out.values(), n.values());
    }

    #[test]
    fn deterministic_per_seed() {
        let n = profile();
        let spec = NoiseSpec::new(0.05, 1234).unwrap();
        assert_eq!(perturb(&n, &spec).values(), perturb(&n, &spec).values());
        let other = perturb(&n, &NoiseSpec::new(0.05, 1235).unwrap());
        assert_ne!(perturb(&n, &spec).values(), other.values());
    }

    #[test]
    fn clipped_noise_on_zero_data() {
        // mean of max(eps U, 0) for U ~ U[-1/2, 1/2] is eps / 8
        let g = Grid::new(1.0, 100_000).unwrap();
        let z = GridFunction::zeros(g);
        let out = perturb(&z, &NoiseSpec::new(0.1, 7).unwrap());
        assert!(out.values().iter().all(|&v| (0.0..=0.05).contains(&v)));
        let mean = out.values().iter().sum::<f64>() / out.len() as f64;
        // sd of a single draw is below 0.02, so 3 sigma of the mean is < 2e-4
        assert!((mean - 0.1 / 8.0).abs() < 2e-4, "mean {mean}");
    }

    #[test]
    fn bounded_where_clipping_is_inactive() {
        let n = profile();
        let eps = 0.1;
        let out = perturb(&n, &NoiseSpec::new(eps, 3).unwrap());
        assert!(out.values().iter().all(|&v| v >= 0.0));
        assert_eq!(out.values()[0], 0.0);
        let mut scaled = Vec::new();
        for (a, b) in n.values().iter().zip(out.values()).skip(1) {
            if *a >= eps / 2.0 {
                assert!((b - a).abs() <= eps / 2.0);
                scaled.push((b - a) / eps);
            }
        }
        // uniform on [-1/2, 1/2]: mean 0, variance 1/12
        let m = scaled.len() as f64;
        let mean = scaled.iter().sum::<f64>() / m;
        let var = scaled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        let sigma = (1.0f64 / 12.0 / m).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.01);
        assert!(realized_relative_error(&n, &out) > 0.0);
    }

    #[test]
    fn negative_epsilon_rejected() {
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }
}
