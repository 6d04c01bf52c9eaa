//! Whole-line problem in frequency space.
//!
//! Transforms live on a truncated band `[-Ξ, Ξ]` sampled at `n_bins + 1`
//! uniform nodes. Every relation here is pointwise in `ξ`:
//! `û(ξ,t) = μ̂₀ e^{-kξ²t} + f̂ φ(ξ,t)` with `φ(ξ,t) = ∫₀ᵗ h(s) e^{-kξ²(t-s)} ds`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::LineTruncation;
use crate::time_profile::TimeProfile;

/// Kernels below this fraction of `∫₀ᵀ|h|` are treated as zero.
pub const SINGULAR_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqGrid {
    xi_max: f64,
    n_bins: usize,
}

impl FreqGrid {
    pub fn new(xi_max: f64, n_bins: usize) -> Result<Self> {
        if !(xi_max > 0.0 && xi_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "band limit must be positive, got {xi_max}"
            )));
        }
        if n_bins == 0 || !n_bins.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "bin count must be even and positive, got {n_bins}"
            )));
        }
        Ok(Self { xi_max, n_bins })
    }

    pub fn from_truncation(t: LineTruncation) -> Result<Self> {
        Self::new(t.xi_max, t.n_bins)
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn n_nodes(&self) -> usize {
        self.n_bins + 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.xi_max / self.n_bins as f64
    }

    /// `ξ_j = (j - n/2) Δ`, so the middle node is exactly 0.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - (self.n_bins / 2) as f64) * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|j| self.node(j))
    }

    /// Index of the node mirrored through `ξ = 0`.
    pub fn mirror(&self, j: usize) -> usize {
        self.n_bins - j
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let d = self.spacing();
        let mut w = vec![d; self.n_nodes()];
        w[0] = 0.5 * d;
        w[self.n_bins] = 0.5 * d;
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqFunction {
    grid: FreqGrid,
    values: Vec<Complex64>,
}

impl FreqFunction {
    pub fn new(grid: FreqGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} frequency nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if let Some(index) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: FreqGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: FreqGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_nodes()],
        }
    }

    pub fn grid(&self) -> &FreqGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sub(&self, other: &FreqFunction) -> Result<FreqFunction> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        FreqFunction::new(self.grid, values)
    }

    /// `F(-ξ) = conj F(ξ)` within `tol` on every node.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        (0..self.grid.n_nodes())
            .all(|j| (self.values[j] - self.values[self.grid.mirror(j)].conj()).norm() <= tol)
    }

    /// Trapezoid approximation of `(∫ |F|² dξ)^{1/2}` over the band.
    pub fn l2_norm(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, z)| w * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn check_same_grid(a: &FreqGrid, b: &FreqGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!(
            "frequency grids differ: (Ξ = {}, {} bins) vs (Ξ = {}, {} bins)",
            a.xi_max, a.n_bins, b.xi_max, b.n_bins
        )));
    }
    Ok(())
}

/// `φ(ξ, t)`, zero at `t = 0`.
pub fn line_kernel(h: &TimeProfile, k: f64, xi: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    h.decayed_kernel(k * xi * xi, t)
}

fn check_time(h: &TimeProfile, t: f64) -> Result<()> {
    let horizon = h.horizon();
    if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, {horizon}]")));
    }
    Ok(())
}

/// `û(·, t)` from `μ̂₀` and `f̂`.
pub fn line_forward(
    mu0_hat: &FreqFunction,
    f_hat: &FreqFunction,
    h: &TimeProfile,
    k: f64,
    t: f64,
) -> Result<FreqFunction> {
    check_same_grid(&mu0_hat.grid, &f_hat.grid)?;
    check_time(h, t)?;
    let grid = mu0_hat.grid;
    let values = grid
        .nodes()
        .zip(mu0_hat.values.iter().zip(&f_hat.values))
        .map(|(xi, (m0, f))| {
            let decay = (-k * xi * xi * t).exp();
            Ok(m0 * decay + f * line_kernel(h, k, xi, t)?)
        })
        .collect::<Result<Vec<_>>>()?;
    FreqFunction::new(grid, values)
}

/// `f̂ = (μ̂_T - μ̂₀ e^{-kξ²T}) / φ(ξ, T)` on every node.
pub fn line_invert_exact(
    mu0_hat: &FreqFunction,
    mu_t_hat: &FreqFunction,
    h: &TimeProfile,
    k: f64,
) -> Result<FreqFunction> {
    check_same_grid(&mu0_hat.grid, &mu_t_hat.grid)?;
    let horizon = h.horizon();
    let floor = SINGULAR_RATIO * h.total_abs_mass();
    let grid = mu0_hat.grid;
    let values = grid
        .nodes()
        .zip(mu0_hat.values.iter().zip(&mu_t_hat.values))
        .map(|(xi, (m0, mt))| {
            let kernel = line_kernel(h, k, xi, horizon)?;
            if kernel.abs() < floor {
                return Err(Error::SingularKernel { xi, kernel });
            }
            Ok((mt - m0 * (-k * xi * xi * horizon).exp()) / kernel)
        })
        .collect::<Result<Vec<_>>>()?;
    FreqFunction::new(grid, values)
}

/// `û(·, t)` from the two end states:
/// `û = [e^{-kξ²t} - e^{-kξ²T} φ(t)/φ(T)] μ̂₀ + φ(t)/φ(T) μ̂_T`.
pub fn line_interpolate(
    mu0_hat: &FreqFunction,
    mu_t_hat: &FreqFunction,
    h: &TimeProfile,
    k: f64,
    t: f64,
) -> Result<FreqFunction> {
    check_same_grid(&mu0_hat.grid, &mu_t_hat.grid)?;
    check_time(h, t)?;
    let horizon = h.horizon();
    let floor = SINGULAR_RATIO * h.total_abs_mass();
    let grid = mu0_hat.grid;
    let values = grid
        .nodes()
        .zip(mu0_hat.values.iter().zip(&mu_t_hat.values))
        .map(|(xi, (m0, mt))| {
            let rate = k * xi * xi;
            let end = line_kernel(h, k, xi, horizon)?;
            if end.abs() < floor {
                return Err(Error::SingularKernel { xi, kernel: end });
            }
            let ratio = line_kernel(h, k, xi, t)? / end;
            let w0 = (-rate * t).exp() - (-rate * horizon).exp() * ratio;
            Ok(m0 * w0 + mt * ratio)
        })
        .collect::<Result<Vec<_>>>()?;
    FreqFunction::new(grid, values)
}
