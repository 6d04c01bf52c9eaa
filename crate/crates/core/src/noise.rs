//! Multiplicative uniform measurement noise,
//! `μ_T^δ(x_i) = μ_T(x_i) (1 + 2 (u_i - 1/2) ε)`, `u_i ~ U[0, 1)`.
//!
//! Draws come from ChaCha8 seeded with `seed_from_u64(seed)`, one `u64` per
//! node in node order, mapped to `[0, 1)` as `(x >> 11) · 2^{-53}`.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cosine::{l2_norm, GridFunction};
use crate::error::{Error, Result};
use crate::line::FreqFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Generator {
    #[default]
    ChaCha8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    noise_level: f64,
    seed: u64,
    generator: Generator,
}

impl NoiseSpec {
    pub fn new(noise_level: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise_level) {
            return Err(Error::Parameter(format!(
                "noise level must lie in [0, 1], got {noise_level}"
            )));
        }
        Ok(Self {
            noise_level,
            seed,
            generator: Generator::ChaCha8,
        })
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    fn rng(&self) -> ChaCha8Rng {
        match self.generator {
            Generator::ChaCha8 => ChaCha8Rng::seed_from_u64(self.seed),
        }
    }
}

/// Uniform draw in `[0, 1)` from the top 53 bits of one `u64`.
pub fn uniform01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Perturbed data and `δ = ‖μ_T^δ - μ_T‖`.
pub fn perturb(mu_t: &GridFunction, spec: &NoiseSpec) -> Result<(GridFunction, f64)> {
    let mut rng = spec.rng();
    let lv = spec.noise_level;
    let values = mu_t
        .values()
        .iter()
        .map(|v| v + 2.0 * (uniform01(&mut rng) - 0.5) * lv * v)
        .collect();
    let noisy = GridFunction::new(*mu_t.grid(), values)?;
    let delta = l2_norm(&noisy.sub(mu_t)?)?;
    Ok((noisy, delta))
}

/// Same model applied to frequency data, one draw per node; `δ` is the
/// trapezoid norm of the change.
pub fn perturb_freq(mu_t_hat: &FreqFunction, spec: &NoiseSpec) -> Result<(FreqFunction, f64)> {
    let mut rng = spec.rng();
    let lv = spec.noise_level;
    let values: Vec<Complex64> = mu_t_hat
        .values()
        .iter()
        .map(|v| v + v * (2.0 * (uniform01(&mut rng) - 0.5) * lv))
        .collect();
    let noisy = FreqFunction::new(*mu_t_hat.grid(), values)?;
    let delta = noisy.sub(mu_t_hat)?.l2_norm();
    Ok((noisy, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosine::Grid1D;
    use std::f64::consts::PI;

    fn ex1_final(grid: Grid1D) -> GridFunction {
        // u(x, 1) of the first built-in example
        let p2 = PI * PI;
        GridFunction::from_fn(grid, |x| {
            0.5 + (-4.0 * p2).exp() * (2.0 * PI * x).cos()
                + (9.0 * p2 - 1.0 + (-9.0 * p2).exp()) / (81.0 * p2 * p2) * (3.0 * PI * x).cos()
                + 2.0 * (25.0 * p2 - 1.0 + (-25.0 * p2).exp()) / (625.0 * p2 * p2)
                    * (5.0 * PI * x).cos()
        })
        .unwrap()
    }

    #[test]
    fn zero_level_is_identity() {
        let mu = ex1_final(Grid1D::unit(50).unwrap());
        let (noisy, delta) = perturb(&mu, &NoiseSpec::new(0.0, 9).unwrap()).unwrap();
        assert_eq!(noisy, mu);
        assert_eq!(delta, 0.0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let mu = GridFunction::zeros(Grid1D::unit(50).unwrap());
        let (noisy, delta) = perturb(&mu, &NoiseSpec::new(0.7, 1).unwrap()).unwrap();
        assert!(noisy.values().iter().all(|&v| v == 0.0));
        assert_eq!(delta, 0.0);
    }

    #[test]
    fn nodewise_and_norm_bounds() {
        let mu = ex1_final(Grid1D::unit(50).unwrap());
        for seed in 0..50 {
            let spec = NoiseSpec::new(0.2, seed).unwrap();
            let (noisy, delta) = perturb(&mu, &spec).unwrap();
            for (a, b) in noisy.values().iter().zip(mu.values()) {
                assert!((a - b).abs() <= 0.2 * b.abs() * (1.0 + 1e-15));
            }
            assert!(delta <= 0.2 * l2_norm(&mu).unwrap() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let mu = ex1_final(Grid1D::unit(50).unwrap());
        let spec = NoiseSpec::new(0.05, 42).unwrap();
        let (a, da) = perturb(&mu, &spec).unwrap();
        let (b, db) = perturb(&mu, &spec).unwrap();
        let bits = |g: &GridFunction| g.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(da.to_bits(), db.to_bits());
        let (c, _) = perturb(&mu, &NoiseSpec::new(0.05, 43).unwrap()).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn draws_cover_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let draws: Vec<f64> = (0..10_000).map(|_| uniform01(&mut rng)).collect();
        assert!(draws.iter().all(|&u| (0.0..1.0).contains(&u)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn median_delta_at_one_percent() {
        let mu = ex1_final(Grid1D::unit(50).unwrap());
        let mut deltas: Vec<f64> = (0..1000)
            .map(|seed| {
                perturb(&mu, &NoiseSpec::new(0.01, seed).unwrap())
                    .unwrap()
                    .1
            })
            .collect();
        deltas.sort_by(f64::total_cmp);
        let median = 0.5 * (deltas[499] + deltas[500]);
        assert!((median - 0.003035).abs() <= 0.5 * 0.003035, "{median}");
        // dense-grid expectation ε ‖μ_T‖ / √3
        let rms = 0.01 * l2_norm(&mu).unwrap() / 3f64.sqrt();
        assert!((median - rms).abs() < 0.2 * rms, "{median} vs {rms}");
    }

    #[test]
    fn frequency_data_bound() {
        let grid = crate::line::FreqGrid::new(3.0, 30).unwrap();
        let mu = FreqFunction::from_fn(grid, |xi| Complex64::new((-xi * xi).exp(), xi)).unwrap();
        let (noisy, delta) = perturb_freq(&mu, &NoiseSpec::new(0.1, 5).unwrap()).unwrap();
        assert!(delta <= 0.1 * mu.l2_norm() * (1.0 + 1e-15));
        assert!(noisy.sub(&mu).unwrap().max_abs() > 0.0);
    }

    #[test]
    fn level_outside_unit_interval_is_rejected() {
        assert!(NoiseSpec::new(1.5, 0).is_err());
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }
}
