use std::io::Write;

use rayon::prelude::*;

use crate::cosine::{l2_norm, synthesize, CosineSpectrum, Grid1D, GridFunction};
use crate::cutoff::CutoffSolver;
use crate::error::{Error, Result};
use crate::forward::DEFAULT_INITIAL_MODES;
use crate::noise::{perturb, NoiseSpec};
use crate::problem::ProblemSpec;

use super::examples::{builtin_example, ExampleId};

/// One perturbed-data reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub noise_level: f64,
    pub delta: f64,
    pub theta: usize,
    pub seed: u64,
    pub err_f: f64,
    /// `‖u^δ(·,t_i) - u(·,t_i)‖` for `t_i = iT/n_t`, `i = 1..=n_t`.
    pub err_u: Vec<f64>,
    pub n_stop: Option<usize>,
}

impl RunReport {
    pub fn err_u_max(&self) -> f64 {
        self.err_u.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    pub example: ExampleId,
    /// Noise level and the cut-offs tried at that level.
    pub cells: Vec<(f64, Vec<usize>)>,
    pub seeds: Vec<u64>,
    pub grid_x_cells: usize,
    pub grid_t_cells: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            example: ExampleId::Ex1,
            cells: vec![
                (0.01, vec![12, 24, 36]),
                (0.05, vec![6, 12, 18]),
                (0.10, vec![6, 12, 18]),
                (0.20, vec![6, 12, 18]),
            ],
            seeds: (1..=100).collect(),
            grid_x_cells: 50,
            grid_t_cells: 20,
        }
    }
}

/// Reference `(δ, ‖f^δ - f‖, ‖u^δ - u‖)` for a table cell, if it is one.
pub fn reference_values(noise_level: f64, theta: usize) -> Option<(f64, f64, f64)> {
    // noise level, δ, cut-offs, ‖f^δ - f‖, ‖u^δ - u‖
    type Row = (f64, f64, [usize; 3], [f64; 3], [f64; 3]);
    const ROWS: [Row; 4] = [
        (
            0.01,
            0.003035,
            [12, 24, 36],
            [0.383497, 0.423780, 0.673838],
            [0.017470, 0.044817, 0.183869],
        ),
        (
            0.05,
            0.013690,
            [6, 12, 18],
            [0.346827, 0.617770, 0.580466],
            [0.078773, 0.143316, 0.133631],
        ),
        (
            0.10,
            0.027804,
            [6, 12, 18],
            [0.560617, 0.510970, 1.120361],
            [0.177541, 0.187410, 0.347001],
        ),
        (
            0.20,
            0.055623,
            [6, 12, 18],
            [0.744648, 1.542746, 2.033309],
            [0.415692, 0.564468, 0.727249],
        ),
    ];
    let (_, delta, thetas, ef, eu) = ROWS.iter().find(|r| (r.0 - noise_level).abs() < 1e-12)?;
    let i = thetas.iter().position(|&t| t == theta)?;
    Some((*delta, ef[i], eu[i]))
}

/// `e^{-m²π²k t_i}` and `φ_m(t_i)` on a time grid, shared by every run.
#[derive(Debug, Clone)]
pub struct TimeKernels {
    times: Vec<f64>,
    decays: Vec<Vec<f64>>,
    kernels: Vec<Vec<f64>>,
}

impl TimeKernels {
    pub fn new(spec: &ProblemSpec, times: &[f64], max_mode: usize) -> Result<Self> {
        let mut decays = Vec::with_capacity(times.len());
        let mut kernels = Vec::with_capacity(times.len());
        for &t in times {
            decays.push((0..=max_mode).map(|m| spec.mode_decay(m, t)).collect());
            kernels.push(
                (0..=max_mode)
                    .map(|m| {
                        if t > 0.0 {
                            spec.h().decayed_kernel(spec.mode_rate(m), t)
                        } else {
                            Ok(0.0)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self {
            times: times.to_vec(),
            decays,
            kernels,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Coefficients of `u(·, t_i)`.
    pub fn spectrum(
        &self,
        i: usize,
        initial: &CosineSpectrum,
        source: &CosineSpectrum,
    ) -> Result<CosineSpectrum> {
        let modes = initial.max_mode().max(source.max_mode());
        if modes >= self.decays[i].len() {
            return Err(Error::Parameter(format!(
                "time kernels cached up to mode {}, need {modes}",
                self.decays[i].len() - 1
            )));
        }
        let coeffs = (0..=modes)
            .map(|m| initial.get(m) * self.decays[i][m] + source.get(m) * self.kernels[i][m])
            .collect();
        CosineSpectrum::new(coeffs)
    }
}

/// Runs every (noise level, ϑ, seed) of the cut-off batch. Reports come
/// back ordered by noise level, then ϑ, then seed; `sink` sees each cell's
/// reports as soon as the cell finishes.
pub fn run_table1(
    cfg: &Table1Config,
    mut sink: impl FnMut(&[RunReport]) -> Result<()>,
) -> Result<Vec<RunReport>> {
    if cfg.cells.is_empty() || cfg.seeds.is_empty() || cfg.cells.iter().any(|c| c.1.is_empty()) {
        return Err(Error::Config(
            "noise levels, cut-offs and seeds must be non-empty".into(),
        ));
    }
    if cfg.grid_t_cells == 0 {
        return Err(Error::Config("grid_t_cells must be positive".into()));
    }
    let ex = builtin_example(cfg.example)?;
    let spec = &ex.spec;
    let grid = Grid1D::unit(cfg.grid_x_cells)?;
    let horizon = spec.horizon();
    let times: Vec<f64> = (1..=cfg.grid_t_cells)
        .map(|i| horizon * i as f64 / cfg.grid_t_cells as f64)
        .collect();
    let theta_max = cfg
        .cells
        .iter()
        .flat_map(|c| c.1.iter().copied())
        .max()
        .unwrap_or(0);
    let reference_initial = spec.initial_spectrum(DEFAULT_INITIAL_MODES)?;
    let max_mode = (3 * theta_max)
        .max(reference_initial.max_mode())
        .max(ex.f_spectrum().max_mode());
    let kernels = TimeKernels::new(spec, &times, max_mode)?;
    let reference: Vec<CosineSpectrum> = (0..times.len())
        .map(|i| kernels.spectrum(i, &reference_initial, ex.f_spectrum()))
        .collect::<Result<_>>()?;
    let mu_t = synthesize(
        &kernels.spectrum(times.len() - 1, &reference_initial, ex.f_spectrum())?,
        &grid,
    )?;
    let f_true = ex.f_on(&grid)?;

    let mut all = Vec::new();
    for (level, thetas) in &cfg.cells {
        for &theta in thetas {
            let solver = CutoffSolver::new(spec, theta)?;
            let reports = cfg
                .seeds
                .par_iter()
                .map(|&seed| {
                    let (noisy, delta) = perturb(&mu_t, &NoiseSpec::new(*level, seed)?)?;
                    let (result, _) = solver.reconstruct(&noisy, &grid)?;
                    let err_f = l2_norm(&result.f_delta.sub(&f_true)?)?;
                    let err_u = (0..times.len())
                        .map(|i| {
                            let s = kernels.spectrum(i, solver.initial(), &result.b_delta)?;
                            l2_norm(&synthesize(&s.sub(&reference[i]), &grid)?)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(RunReport {
                        noise_level: *level,
                        delta,
                        theta,
                        seed,
                        err_f,
                        err_u,
                        n_stop: None,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            sink(&reports)?;
            all.extend(reports);
        }
    }
    Ok(all)
}

/// Seed statistics of one (noise level, ϑ) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub noise_level: f64,
    pub theta: usize,
    pub runs: usize,
    pub median_delta: f64,
    pub median_err_f: f64,
    pub iqr_err_f: f64,
    pub median_err_u: f64,
    pub iqr_err_u: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn stats(mut v: Vec<f64>) -> (f64, f64) {
    v.sort_by(f64::total_cmp);
    (quantile(&v, 0.5), quantile(&v, 0.75) - quantile(&v, 0.25))
}

/// Median and interquartile range per cell, in first-appearance order.
pub fn summarize(reports: &[RunReport]) -> Vec<CellSummary> {
    let mut keys: Vec<(f64, usize)> = Vec::new();
    for r in reports {
        if !keys.contains(&(r.noise_level, r.theta)) {
            keys.push((r.noise_level, r.theta));
        }
    }
    keys.into_iter()
        .map(|(level, theta)| {
            let cell: Vec<&RunReport> = reports
                .iter()
                .filter(|r| r.noise_level == level && r.theta == theta)
                .collect();
            let (median_delta, _) = stats(cell.iter().map(|r| r.delta).collect());
            let (median_err_f, iqr_err_f) = stats(cell.iter().map(|r| r.err_f).collect());
            let (median_err_u, iqr_err_u) = stats(cell.iter().map(|r| r.err_u_max()).collect());
            CellSummary {
                noise_level: level,
                theta,
                runs: cell.len(),
                median_delta,
                median_err_f,
                iqr_err_f,
                median_err_u,
                iqr_err_u,
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `noise_level, delta, theta, seed, err_f, err_u_max, n_stop`.
pub fn write_table1_csv<W: Write>(
    out: &mut csv::Writer<W>,
    reports: &[RunReport],
    header: bool,
) -> Result<()> {
    if header {
        out.write_record([
            "noise_level",
            "delta",
            "theta",
            "seed",
            "err_f",
            "err_u_max",
            "n_stop",
        ])?;
    }
    for r in reports {
        out.write_record([
            r.noise_level.to_string(),
            r.delta.to_string(),
            r.theta.to_string(),
            r.seed.to_string(),
            r.err_f.to_string(),
            r.err_u_max().to_string(),
            r.n_stop.map(|n| n.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Cell statistics next to the reference values. `bound` is the configured
/// `M`; `hp_norm` is `‖f‖_p` computed from the exact source.
pub fn write_summary_csv<W: Write>(
    out: &mut csv::Writer<W>,
    summaries: &[CellSummary],
    bound: f64,
    hp_norm: f64,
) -> Result<()> {
    out.write_record([
        "noise_level",
        "theta",
        "runs",
        "median_delta",
        "median_err_f",
        "iqr_err_f",
        "median_err_u_max",
        "iqr_err_u_max",
        "ref_delta",
        "ref_err_f",
        "ref_err_u",
        "bound_m",
        "hp_norm_f",
    ])?;
    for s in summaries {
        let reference = reference_values(s.noise_level, s.theta);
        out.write_record([
            s.noise_level.to_string(),
            s.theta.to_string(),
            s.runs.to_string(),
            s.median_delta.to_string(),
            s.median_err_f.to_string(),
            s.iqr_err_f.to_string(),
            s.median_err_u.to_string(),
            s.iqr_err_u.to_string(),
            opt(reference.map(|p| p.0)),
            opt(reference.map(|p| p.1)),
            opt(reference.map(|p| p.2)),
            bound.to_string(),
            hp_norm.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `x, f_true, f_recon`.
pub fn write_profile_csv<W: Write>(
    out: &mut csv::Writer<W>,
    f_true: &GridFunction,
    f_recon: &GridFunction,
) -> Result<()> {
    if f_true.grid() != f_recon.grid() {
        return Err(Error::GridMismatch(
            "profile columns on different grids".into(),
        ));
    }
    out.write_record(["x", "f_true", "f_recon"])?;
    for (i, x) in f_true.grid().nodes().enumerate() {
        out.write_record([
            x.to_string(),
            f_true.values()[i].to_string(),
            f_recon.values()[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Long format `x, t, u_true, u_recon`.
pub fn write_field_csv<W: Write>(
    out: &mut csv::Writer<W>,
    times: &[f64],
    u_true: &[GridFunction],
    u_recon: &[GridFunction],
) -> Result<()> {
    if times.len() != u_true.len() || times.len() != u_recon.len() {
        return Err(Error::GridMismatch("field columns differ in length".into()));
    }
    out.write_record(["x", "t", "u_true", "u_recon"])?;
    for (i, t) in times.iter().enumerate() {
        if u_true[i].grid() != u_recon[i].grid() {
            return Err(Error::GridMismatch(format!(
                "field slices at t = {t} on different grids"
            )));
        }
        for (j, x) in u_true[i].grid().nodes().enumerate() {
            out.write_record([
                x.to_string(),
                t.to_string(),
                u_true[i].values()[j].to_string(),
                u_recon[i].values()[j].to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
