//! Relaxed iteration with a per-frequency relaxation weight.
//!
//! The iterate is kept in scaled form `w_n = v ĝ_n`, `v = e^{-rate T}`:
//!
//! `w_n = (1 - λ) w_{n-1} + λ χ μ̂_T^δ + λ (1 - χ) v μ̂₀`, `w_0 = v μ̂₀`,
//!
//! with `λ = v^{1/N}` and `χ` the indicator of the cut-off band. The source
//! is `f̂_n = (w_n - v μ̂₀) / φ(T)` on the band and zero outside it, where
//! `φ(T) = ∫₀ᵀ h(s) e^{-rate (T-s)} ds`. The stopping functional is
//! `‖v (μ̂_T^δ - w_n) / φ(T)‖` over the band.
//!
//! The same recursion runs on the whole line (`rate = kξ²`, complex bins) and
//! on Neumann cosine modes (`rate = m²π²k`, real bins).

use std::fmt::Debug;
use std::io::Write;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;

use crate::cosine::{analyze_with, synthesize, CosineSpectrum, Grid1D, GridFunction, Resolution};
use crate::error::{Error, Result};
use crate::forward::SeriesField;
use crate::line::{line_forward, line_kernel, FreqFunction, SINGULAR_RATIO};
use crate::params::{discrepancy_threshold, RegConfig, RuleKind};
use crate::problem::ProblemSpec;
use crate::time_profile::TimeProfile;

/// One row of the residual trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub residual: f64,
    pub threshold: f64,
}

/// Value stored in one frequency bin.
pub trait Bin:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn abs2(self) -> f64;
}

impl Bin for f64 {
    fn zero() -> Self {
        0.0
    }

    fn abs2(self) -> f64 {
        self * self
    }
}

impl Bin for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
}

/// `e^{-kξ²T/N}`.
pub fn lambda_of_frequency(xi: f64, k: f64, horizon: f64, relaxation: u32) -> f64 {
    (-k * xi * xi * horizon / relaxation as f64).exp()
}

/// `e^{-m²π²kT/N}`.
pub fn lambda_of_mode(m: usize, k: f64, horizon: f64, relaxation: u32) -> f64 {
    let mpi = m as f64 * std::f64::consts::PI;
    lambda_of_frequency(mpi, k, horizon, relaxation)
}

/// Per-bin coefficients of the recursion.
#[derive(Debug, Clone)]
pub struct BinSystem<B> {
    lambda: Vec<f64>,
    data: Vec<B>,
    v_mu0: Vec<B>,
    in_band: Vec<bool>,
    kernel: Vec<f64>,
    residual_weight: Vec<f64>,
}

/// Inputs of one bin.
#[derive(Debug, Clone, Copy)]
pub struct BinInput<B> {
    pub lambda: f64,
    /// `μ̂_T^δ`.
    pub data: B,
    /// `v μ̂₀`.
    pub v_mu0: B,
    pub in_band: bool,
    /// `φ(T)`; unused outside the band.
    pub kernel: f64,
    /// `v / φ(T)`; unused outside the band.
    pub gain: f64,
    /// Quadrature weight of the bin in the residual norm.
    pub weight: f64,
}

impl<B: Bin> BinSystem<B> {
    pub fn new(bins: impl IntoIterator<Item = BinInput<B>>) -> Result<Self> {
        let mut sys = Self {
            lambda: Vec::new(),
            data: Vec::new(),
            v_mu0: Vec::new(),
            in_band: Vec::new(),
            kernel: Vec::new(),
            residual_weight: Vec::new(),
        };
        for (j, b) in bins.into_iter().enumerate() {
            // λ underflows to 0 for strongly damped bins
            if !(0.0..=1.0).contains(&b.lambda) {
                return Err(Error::Parameter(format!(
                    "bin {j}: λ = {} outside [0, 1]",
                    b.lambda
                )));
            }
            sys.lambda.push(b.lambda);
            sys.data.push(b.data);
            sys.v_mu0.push(b.v_mu0);
            sys.in_band.push(b.in_band);
            sys.kernel.push(b.kernel);
            sys.residual_weight.push(if b.in_band {
                b.weight * b.gain * b.gain
            } else {
                0.0
            });
        }
        Ok(sys)
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Limit of the recursion in each bin.
    pub fn fixed_point(&self, j: usize) -> B {
        if self.in_band[j] {
            self.data[j]
        } else {
            self.v_mu0[j]
        }
    }

    /// `w_0 = v μ̂₀`.
    pub fn initial_state(&self) -> IterState<B> {
        self.state(0, self.v_mu0.clone())
    }

    pub fn state(&self, n: usize, w: Vec<B>) -> IterState<B> {
        let residual = self.residual(&w);
        IterState { w, n, residual }
    }

    pub fn residual(&self, w: &[B]) -> f64 {
        self.residual_weight
            .iter()
            .zip(self.data.iter().zip(w))
            .filter(|(q, _)| **q > 0.0)
            .map(|(q, (d, w))| q * (*d - *w).abs2())
            .sum::<f64>()
            .sqrt()
    }

    /// `w_n` from `w_0` through `w_n - w_∞ = (1 - λ)ⁿ (w_0 - w_∞)`.
    pub fn jump(&self, start: &IterState<B>, n: usize) -> IterState<B> {
        let steps = n.saturating_sub(start.n);
        let w = (0..self.len())
            .map(|j| {
                let fix = self.fixed_point(j);
                fix + (start.w[j] - fix) * (steps as f64 * (-self.lambda[j]).ln_1p()).exp()
            })
            .collect();
        self.state(start.n + steps, w)
    }

    /// `f̂ = (w - v μ̂₀) / φ(T)` on the band, exactly zero elsewhere.
    pub fn source(&self, w: &[B]) -> Vec<B> {
        (0..self.len())
            .map(|j| {
                if self.in_band[j] {
                    (w[j] - self.v_mu0[j]) * (1.0 / self.kernel[j])
                } else {
                    B::zero()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterState<B> {
    pub w: Vec<B>,
    pub n: usize,
    pub residual: f64,
}

/// One relaxation step.
pub fn iterate_step<B: Bin>(sys: &BinSystem<B>, state: &IterState<B>) -> IterState<B> {
    let w = state
        .w
        .iter()
        .enumerate()
        .map(|(j, w)| *w * (1.0 - sys.lambda[j]) + sys.fixed_point(j) * sys.lambda[j])
        .collect();
    sys.state(state.n + 1, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub kind: RuleKind,
    pub relaxation: u32,
    /// `⌊(M/δ)^{1/N}⌋` (times the configured multiplier).
    pub a_priori_steps: usize,
    pub tau: f64,
    /// `τ δ^{1/(1+σ)}`.
    pub threshold: f64,
    pub n_max: usize,
}

impl StoppingRule {
    pub fn from_config(cfg: &RegConfig, delta: f64, c_h: f64) -> Result<Self> {
        if cfg.relaxation == 0 {
            return Err(Error::Parameter("relaxation exponent N must be ≥ 1".into()));
        }
        if cfg.n_max == 0 {
            return Err(Error::Parameter("n_max must be ≥ 1".into()));
        }
        let tau = cfg.tau_for(delta, c_h)?;
        if tau <= 1.0 {
            log::warn!("discrepancy factor τ = {tau} is not above 1");
        }
        Ok(Self {
            kind: cfg.rule,
            relaxation: cfg.relaxation,
            a_priori_steps: cfg.a_priori_stop(delta)?,
            tau,
            threshold: discrepancy_threshold(tau, delta, cfg.sigma),
            n_max: cfg.n_max,
        })
    }
}

/// Runs the recursion from `w_0` until `rule` stops it.
pub fn run_bins<B: Bin>(
    sys: &BinSystem<B>,
    rule: &StoppingRule,
) -> Result<(IterState<B>, Vec<TraceRow>)> {
    let mut state = sys.initial_state();
    let row = |s: &IterState<B>| TraceRow {
        n: s.n,
        residual: s.residual,
        threshold: rule.threshold,
    };
    let mut trace = vec![row(&state)];
    match rule.kind {
        RuleKind::APriori => {
            let target = rule.a_priori_steps;
            if target > rule.n_max {
                state = sys.jump(&state, target);
                trace.push(row(&state));
            } else {
                while state.n < target {
                    state = iterate_step(sys, &state);
                    trace.push(row(&state));
                }
            }
        }
        RuleKind::Discrepancy => {
            while state.residual > rule.threshold {
                if state.n >= rule.n_max {
                    return Err(Error::NonConvergence {
                        n_max: rule.n_max,
                        trace,
                    });
                }
                state = iterate_step(sys, &state);
                trace.push(row(&state));
            }
        }
    }
    Ok((state, trace))
}

/// Writes the trace as CSV with columns `n, residual, threshold`.
pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    write_trace(&mut out, trace)?;
    out.flush()?;
    Ok(())
}

pub(crate) fn write_trace<W: Write>(out: &mut csv::Writer<W>, trace: &[TraceRow]) -> Result<()> {
    out.write_record(["n", "residual", "threshold"])?;
    for r in trace {
        out.write_record([
            r.n.to_string(),
            r.residual.to_string(),
            r.threshold.to_string(),
        ])?;
    }
    Ok(())
}

/// Neumann reconstruction by the mode-space iteration.
#[derive(Debug, Clone)]
pub struct NeumannReconstruction<'a> {
    pub theta: usize,
    pub source: CosineSpectrum,
    pub f: GridFunction,
    pub field: SeriesField<'a>,
    pub n_stop: usize,
    pub trace: Vec<TraceRow>,
    pub rule: StoppingRule,
}

/// Mode-space iteration on bins `m = 0..=max(ϑ, 3ϑ)`; modes `m ≤ ϑ` form
/// the band.
pub fn run_neumann<'a>(
    spec: &'a ProblemSpec,
    mu_t_delta: &GridFunction,
    cfg: &RegConfig,
    delta: f64,
    grid: &Grid1D,
) -> Result<NeumannReconstruction<'a>> {
    spec.require_neumann()?;
    let (k, horizon) = (spec.k(), spec.horizon());
    let h = spec.h();
    let theta = cfg.theta_for(delta, k, horizon)?;
    let rule = StoppingRule::from_config(cfg, delta, h.total_abs_mass())?;
    let initial = spec.initial_spectrum(3 * theta)?;
    let data = analyze_with(mu_t_delta, theta, Resolution::Sampled)?;
    let floor = SINGULAR_RATIO * h.total_abs_mass();
    let bins = (0..=theta.max(initial.max_mode()))
        .map(|m| {
            let v = spec.mode_decay(m, horizon);
            let in_band = m <= theta;
            let kernel = if in_band {
                let kernel = h.decayed_kernel(spec.mode_rate(m), horizon)?;
                if kernel.abs() < floor {
                    return Err(Error::SingularMode { m, kernel });
                }
                kernel
            } else {
                1.0
            };
            Ok(BinInput {
                lambda: lambda_of_mode(m, k, horizon, cfg.relaxation),
                data: data.get(m),
                v_mu0: v * initial.get(m),
                in_band,
                kernel,
                gain: v / kernel,
                weight: if m == 0 { 1.0 } else { 0.5 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sys = BinSystem::new(bins)?;
    let (state, trace) = run_bins(&sys, &rule)?;
    let mut coeffs = sys.source(&state.w);
    coeffs.truncate(theta + 1);
    let source = CosineSpectrum::new(coeffs)?;
    let f = synthesize(&source, grid)?;
    let field = SeriesField::new(spec, initial, source.clone())?;
    Ok(NeumannReconstruction {
        theta,
        source,
        f,
        field,
        n_stop: state.n,
        trace,
        rule,
    })
}

/// Whole-line reconstruction.
#[derive(Debug, Clone)]
pub struct LineReconstruction {
    pub theta1: f64,
    pub f_hat: FreqFunction,
    pub n_stop: usize,
    pub trace: Vec<TraceRow>,
    pub rule: StoppingRule,
    mu0_hat: FreqFunction,
    h: TimeProfile,
    k: f64,
}

impl LineReconstruction {
    /// `û^δ(·, t) = μ̂₀ e^{-kξ²t} + f̂^δ φ(ξ, t)`.
    pub fn u_hat_at(&self, t: f64) -> Result<FreqFunction> {
        line_forward(&self.mu0_hat, &self.f_hat, &self.h, self.k, t)
    }
}

pub fn run_line(
    mu0_hat: &FreqFunction,
    mu_t_delta_hat: &FreqFunction,
    h: &TimeProfile,
    k: f64,
    cfg: &RegConfig,
    delta: f64,
) -> Result<LineReconstruction> {
    crate::line::check_same_grid(mu0_hat.grid(), mu_t_delta_hat.grid())?;
    if !(k > 0.0) {
        return Err(Error::Parameter(format!(
            "diffusivity must be positive, got {k}"
        )));
    }
    let horizon = h.horizon();
    let theta1 = cfg.theta1_for(delta, k, horizon)?;
    let rule = StoppingRule::from_config(cfg, delta, h.total_abs_mass())?;
    let grid = *mu0_hat.grid();
    let weights = grid.weights();
    let floor = SINGULAR_RATIO * h.total_abs_mass();
    let bins = grid
        .nodes()
        .enumerate()
        .map(|(j, xi)| {
            let v = (-k * xi * xi * horizon).exp();
            let in_band = xi.abs() <= theta1;
            let kernel = if in_band {
                let kernel = line_kernel(h, k, xi, horizon)?;
                if kernel.abs() < floor {
                    return Err(Error::SingularKernel { xi, kernel });
                }
                kernel
            } else {
                1.0
            };
            Ok(BinInput {
                lambda: lambda_of_frequency(xi, k, horizon, cfg.relaxation),
                data: mu_t_delta_hat.values()[j],
                v_mu0: mu0_hat.values()[j] * v,
                in_band,
                kernel,
                gain: v / kernel,
                weight: weights[j],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sys = BinSystem::new(bins)?;
    let (state, trace) = run_bins(&sys, &rule)?;
    let f_hat = FreqFunction::new(grid, sys.source(&state.w))?;
    Ok(LineReconstruction {
        theta1,
        f_hat,
        n_stop: state.n,
        trace,
        rule,
        mu0_hat: mu0_hat.clone(),
        h: h.clone(),
        k,
    })
}
