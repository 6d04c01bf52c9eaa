//! Direct Neumann problem `u_t = k u_xx + f(x) h(t)`, `u_x(0,t) = u_x(1,t) = 0`.
//!
//! The production solver is the cosine series
//! `u(x,t) = Σ_m [e^{-m²π²kt} a_m + b_m φ_m(t)] cos(mπx)` with
//! `φ_m(t) = ∫₀ᵗ h(s) e^{-m²π²k(t-s)} ds`. The heat-kernel form on the whole
//! line, applied to the even periodic extensions of `μ₀` and `f`, is kept as
//! an independent check ([`extension_solution`], [`kernel_identity_check`]).

use std::f64::consts::PI;

use crate::cosine::{quadrature, synthesize, CosineSpectrum, Grid1D, GridFunction};
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;

/// Initial-state modes used when no cut-off is in play (three times the
/// default cut-off of 12).
pub const DEFAULT_INITIAL_MODES: usize = 36;

/// Temperature field `u(·, t)` generated by an initial spectrum and a source
/// spectrum; evaluates at any `t ∈ [0, T]`.
#[derive(Debug, Clone)]
pub struct SeriesField<'a> {
    spec: &'a ProblemSpec,
    initial: CosineSpectrum,
    source: CosineSpectrum,
}

impl<'a> SeriesField<'a> {
    pub fn new(
        spec: &'a ProblemSpec,
        initial: CosineSpectrum,
        source: CosineSpectrum,
    ) -> Result<Self> {
        spec.require_neumann()?;
        Ok(Self {
            spec,
            initial,
            source,
        })
    }

    pub fn initial(&self) -> &CosineSpectrum {
        &self.initial
    }

    pub fn source(&self) -> &CosineSpectrum {
        &self.source
    }

    /// Cosine coefficients of `u(·, t)`.
    pub fn spectrum_at(&self, t: f64) -> Result<CosineSpectrum> {
        let horizon = self.spec.horizon();
        if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {horizon}]")));
        }
        let modes = self.initial.max_mode().max(self.source.max_mode());
        let coeffs = (0..=modes)
            .map(|m| {
                let mut c = self.initial.get(m) * self.spec.mode_decay(m, t);
                let b = self.source.get(m);
                if b != 0.0 && t > 0.0 {
                    c += b * self.spec.h().decayed_kernel(self.spec.mode_rate(m), t)?;
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        CosineSpectrum::new(coeffs)
    }

    pub fn at(&self, t: f64, grid: &Grid1D) -> Result<GridFunction> {
        synthesize(&self.spectrum_at(t)?, grid)
    }
}

/// Field for source `f`, with `μ₀` expanded to [`DEFAULT_INITIAL_MODES`].
pub fn series_field<'a>(spec: &'a ProblemSpec, f: &CosineSpectrum) -> Result<SeriesField<'a>> {
    let initial = spec.initial_spectrum(DEFAULT_INITIAL_MODES)?;
    SeriesField::new(spec, initial, f.clone())
}

/// `u(·, t)` sampled on `grid`.
pub fn solve_series(
    spec: &ProblemSpec,
    f: &CosineSpectrum,
    t: f64,
    grid: &Grid1D,
) -> Result<GridFunction> {
    series_field(spec, f)?.at(t, grid)
}

/// `μ_T = u(·, T)`.
pub fn final_data(spec: &ProblemSpec, f: &CosineSpectrum, grid: &Grid1D) -> Result<GridFunction> {
    solve_series(spec, f, spec.horizon(), grid)
}

fn gaussian_tail(z: f64) -> f64 {
    // erfc(z) ≤ e^{-z²} / (z √π)
    (-z * z).exp() / (z * PI.sqrt())
}

/// Both sides of `∫ cos(mπy) G(x - y, t) dy = cos(mπx) e^{-m²π²kt}`, where
/// `G` is the heat kernel; the left side by composite Simpson over
/// `[x - half_width, x + half_width]`.
pub fn kernel_identity_check(
    m: usize,
    k: f64,
    t: f64,
    x: f64,
    half_width: f64,
) -> Result<(f64, f64)> {
    if !(t > 0.0 && k > 0.0) {
        return Err(Error::Parameter(format!(
            "need k > 0 and t > 0, got k = {k}, t = {t}"
        )));
    }
    let spread = (4.0 * k * t).sqrt();
    let tail = gaussian_tail(half_width / spread);
    if !(half_width > 0.0) || tail > 1e-12 {
        return Err(Error::TailBound { half_width, tail });
    }
    let mpi = m as f64 * PI;
    let mut step = spread / 16.0;
    if m > 0 {
        step = step.min(1.0 / (16.0 * m as f64));
    }
    let mut n_cells = (2.0 * half_width / step).ceil() as usize;
    n_cells += n_cells % 2;
    let norm = 1.0 / (PI * 4.0 * k * t).sqrt();
    let lhs = quadrature::simpson_fn(
        |y| (mpi * y).cos() * norm * (-(x - y) * (x - y) / (4.0 * k * t)).exp(),
        x - half_width,
        x + half_width,
        n_cells,
    )?;
    let rhs = (mpi * x).cos() * (-mpi * mpi * k * t).exp();
    Ok((lhs, rhs))
}

/// `∫ g(x - 2√(kτ) ζ) e^{-ζ²} / √π dζ`, i.e. the heat semigroup applied to
/// the periodic extension of the cosine series `g`.
fn heat_smooth(g: &CosineSpectrum, x: f64, k: f64, tau: f64) -> Result<f64> {
    if tau <= 0.0 {
        return Ok(g.eval(x));
    }
    const ZETA_MAX: f64 = 7.0;
    let scale = 2.0 * (k * tau).sqrt();
    let phase_rate = scale * g.max_mode() as f64 * PI;
    let mut n_cells = ((2.0 * ZETA_MAX * phase_rate * 4.0).ceil() as usize).max(400);
    n_cells += n_cells % 2;
    quadrature::simpson_fn(
        |z| g.eval(x - scale * z) * (-z * z).exp() / PI.sqrt(),
        -ZETA_MAX,
        ZETA_MAX,
        n_cells,
    )
}

/// `u(x, t)` from the heat-kernel representation on the whole line with the
/// even periodic extensions of `μ₀` and `f`. Quadrature only; used to
/// validate the series solver. `t` must be a node of the `h` sample grid.
pub fn extension_solution(spec: &ProblemSpec, f: &CosineSpectrum, x: f64, t: f64) -> Result<f64> {
    spec.require_neumann()?;
    let samples = spec.h().samples();
    let grid = samples.grid();
    let pos = t / grid.spacing();
    let j = pos.round();
    if !(t > 0.0)
        || (pos - j).abs() > 1e-9
        || j as usize > grid.n_cells()
        || !(j as usize).is_multiple_of(2)
    {
        return Err(Error::Domain(format!(
            "t = {t} must be an even-indexed node of the h grid"
        )));
    }
    let j = j as usize;
    let k = spec.k();
    let initial = spec.initial_spectrum(DEFAULT_INITIAL_MODES)?;
    let first = heat_smooth(&initial, x, k, t)?;
    let weights = quadrature::simpson_weights(j, grid.spacing())?;
    let mut second = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let s = grid.node(i);
        second += w * samples.values()[i] * heat_smooth(f, x, k, t - s)?;
    }
    Ok(first + second)
}
