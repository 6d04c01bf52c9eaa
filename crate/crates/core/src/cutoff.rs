//! Frequency cut-off inversion for the Neumann problem.
//!
//! `b_m^δ = (c_m^δ - a_m e^{-m²π²kT}) / φ_m(T)` for `m ≤ ϑ` and zero above,
//! with `φ_m(T) = ∫₀ᵀ h(s) e^{-m²π²k(T-s)} ds`.

use crate::cosine::{analyze_with, synthesize, CosineSpectrum, Grid1D, GridFunction, Resolution};
use crate::error::{Error, Result};
use crate::forward::SeriesField;
use crate::line::SINGULAR_RATIO;
use crate::params::{cutoff_frequency, floor_index};
use crate::problem::ProblemSpec;
use crate::time_profile::TimeProfile;

#[derive(Debug, Clone)]
pub struct CutoffResult {
    /// `b^δ_0 ..= b^δ_ϑ`.
    pub b_delta: CosineSpectrum,
    pub f_delta: GridFunction,
    pub theta: usize,
    /// `σ_m = φ_m(T) / ∫₀ᵀ h`.
    pub singular_values: Vec<f64>,
}

/// `⌊√( L · L^{-(1+σ)p/2} / ((1+σ) k T) )⌋`, `L = ln(M/δ)`.
pub fn theta_of(bound: f64, delta: f64, k: f64, horizon: f64, p: f64, sigma: f64) -> Result<usize> {
    Ok(floor_index(cutoff_frequency(
        bound, delta, k, horizon, p, sigma,
    )?))
}

fn mode_rate(m: usize, k: f64) -> f64 {
    let mpi = m as f64 * std::f64::consts::PI;
    mpi * mpi * k
}

/// `φ_m(T)` for `m = 0..=theta`, refusing kernels below `1e-13 ∫|h|`.
pub fn mode_kernels(h: &TimeProfile, k: f64, theta: usize) -> Result<Vec<f64>> {
    let floor = SINGULAR_RATIO * h.total_abs_mass();
    (0..=theta)
        .map(|m| {
            let kernel = h.decayed_kernel(mode_rate(m, k), h.horizon())?;
            if kernel.abs() < floor {
                return Err(Error::SingularMode { m, kernel });
            }
            Ok(kernel)
        })
        .collect()
}

/// `σ_m = φ_m(T) / ∫₀ᵀ h` for `m = 0..=theta`.
pub fn singular_values(h: &TimeProfile, k: f64, theta: usize) -> Result<Vec<f64>> {
    let total = h.decayed_kernel(0.0, h.horizon())?;
    if total == 0.0 {
        return Err(Error::SingularMode { m: 0, kernel: 0.0 });
    }
    Ok(mode_kernels(h, k, theta)?
        .into_iter()
        .map(|v| v / total)
        .collect())
}

fn apply(
    c_delta: &CosineSpectrum,
    a: &CosineSpectrum,
    kernels: &[f64],
    k: f64,
    horizon: f64,
) -> Result<CosineSpectrum> {
    let coeffs = kernels
        .iter()
        .enumerate()
        .map(|(m, kernel)| {
            (c_delta.get(m) - a.get(m) * (-mode_rate(m, k) * horizon).exp()) / kernel
        })
        .collect();
    CosineSpectrum::new(coeffs)
}

/// Cut-off coefficients `b^δ_0 ..= b^δ_ϑ`.
pub fn invert_coefficients(
    c_delta: &CosineSpectrum,
    a: &CosineSpectrum,
    h: &TimeProfile,
    k: f64,
    theta: usize,
) -> Result<CosineSpectrum> {
    let kernels = mode_kernels(h, k, theta)?;
    apply(c_delta, a, &kernels, k, h.horizon())
}

/// Kernels and initial coefficients for repeated inversions at one `ϑ`.
#[derive(Debug, Clone)]
pub struct CutoffSolver<'a> {
    spec: &'a ProblemSpec,
    theta: usize,
    kernels: Vec<f64>,
    initial: CosineSpectrum,
    singular_values: Vec<f64>,
}

impl<'a> CutoffSolver<'a> {
    pub fn new(spec: &'a ProblemSpec, theta: usize) -> Result<Self> {
        spec.require_neumann()?;
        let h = spec.h();
        let kernels = mode_kernels(h, spec.k(), theta)?;
        let total = h.decayed_kernel(0.0, h.horizon())?;
        let singular_values = kernels.iter().map(|v| v / total).collect();
        Ok(Self {
            spec,
            theta,
            kernels,
            initial: spec.initial_spectrum(3 * theta)?,
            singular_values,
        })
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    /// `a_m` up to `3ϑ`, limited by the resolution of `μ₀`.
    pub fn initial(&self) -> &CosineSpectrum {
        &self.initial
    }

    pub fn reconstruct(
        &self,
        mu_t_delta: &GridFunction,
        grid: &Grid1D,
    ) -> Result<(CutoffResult, SeriesField<'a>)> {
        // measured data may sit on a coarse grid; Simpson stays exact for
        // band-limited data as long as m < n_cells
        let c_delta = analyze_with(mu_t_delta, self.theta, Resolution::Sampled)?;
        let b_delta = apply(
            &c_delta,
            &self.initial,
            &self.kernels,
            self.spec.k(),
            self.spec.horizon(),
        )?;
        let f_delta = synthesize(&b_delta, grid)?;
        let field = SeriesField::new(self.spec, self.initial.clone(), b_delta.clone())?;
        let result = CutoffResult {
            b_delta,
            f_delta,
            theta: self.theta,
            singular_values: self.singular_values.clone(),
        };
        Ok((result, field))
    }
}

/// `f^δ` on `grid` and the field `u^δ`.
pub fn reconstruct<'a>(
    spec: &'a ProblemSpec,
    mu_t_delta: &GridFunction,
    theta: usize,
    grid: &Grid1D,
) -> Result<(CutoffResult, SeriesField<'a>)> {
    CutoffSolver::new(spec, theta)?.reconstruct(mu_t_delta, grid)
}
