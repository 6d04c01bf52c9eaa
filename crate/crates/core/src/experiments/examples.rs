use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::cosine::quadrature::simpson_fn;
use crate::cosine::{CosineSpectrum, Grid1D, GridFunction};
use crate::error::{Error, Result};
use crate::forward::{SeriesField, DEFAULT_INITIAL_MODES};
use crate::problem::ProblemSpec;
use crate::time_profile::TimeProfile;

/// Cells of the grids carrying `μ₀` and the attached `f`.
pub const FINE_CELLS: usize = 1000;

/// Modes of the reference source spectrum for non band-limited sources.
pub const REFERENCE_MODES: usize = 200;

const CELLS_PER_PIECE: usize = 4000;

type Profile = fn(f64) -> f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
}

impl ExampleId {
    pub const ALL: [ExampleId; 3] = [ExampleId::Ex1, ExampleId::Ex2, ExampleId::Ex3];
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ex1" | "1" => Ok(ExampleId::Ex1),
            "ex2" | "2" => Ok(ExampleId::Ex2),
            "ex3" | "3" => Ok(ExampleId::Ex3),
            other => Err(Error::UnknownExample(other.to_string())),
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExampleId::Ex1 => "ex1",
            ExampleId::Ex2 => "ex2",
            ExampleId::Ex3 => "ex3",
        })
    }
}

fn ex1_f(x: f64) -> f64 {
    1.0 + (3.0 * PI * x).cos() + 2.0 * (5.0 * PI * x).cos()
}

fn ex1_mu0(x: f64) -> f64 {
    (2.0 * PI * x).cos()
}

fn ex1_h(t: f64) -> f64 {
    t
}

fn ex2_f(x: f64) -> f64 {
    (1.0 - x) * x / ((x - 0.5).abs() + 0.5)
}

fn ex2_h(t: f64) -> f64 {
    5.0 * (2.0 * PI * t).sin() + 1.0
}

fn ex3_f(x: f64) -> f64 {
    if !(0.2..=0.8).contains(&x) {
        0.0
    } else if x <= 0.5 {
        x
    } else {
        1.0 - x
    }
}

fn ex3_h(t: f64) -> f64 {
    t.exp() + 6.0 * (4.0 * PI * t).sin() + t * t + 1.0
}

fn zero(_: f64) -> f64 {
    0.0
}

/// A built-in problem with its exact source.
#[derive(Debug, Clone)]
pub struct BuiltinExample {
    pub id: ExampleId,
    pub spec: ProblemSpec,
    f: fn(f64) -> f64,
    breakpoints: &'static [f64],
    f_spectrum: CosineSpectrum,
}

/// Example with `k = T = 1`.
pub fn builtin_example(id: ExampleId) -> Result<BuiltinExample> {
    builtin_example_with(id, 1.0, 1.0)
}

pub fn builtin_example_with(id: ExampleId, k: f64, horizon: f64) -> Result<BuiltinExample> {
    let (f, mu0, h, breakpoints): (Profile, Profile, Profile, &'static [f64]) = match id {
        ExampleId::Ex1 => (ex1_f, ex1_mu0, ex1_h, &[]),
        ExampleId::Ex2 => (ex2_f, zero, ex2_h, &[0.5]),
        ExampleId::Ex3 => (ex3_f, zero, ex3_h, &[0.2, 0.5, 0.8]),
    };
    let fine = Grid1D::unit(FINE_CELLS)?;
    let spec = ProblemSpec::neumann(
        k,
        TimeProfile::from_fn(horizon, h)?,
        GridFunction::from_fn(fine, mu0)?,
    )?
    .with_f_true(GridFunction::from_fn(fine, f)?)?;
    let f_spectrum = match id {
        ExampleId::Ex1 => CosineSpectrum::new(vec![1.0, 0.0, 0.0, 1.0, 0.0, 2.0])?,
        _ => piecewise_spectrum(f, breakpoints, REFERENCE_MODES)?,
    };
    Ok(BuiltinExample {
        id,
        spec,
        f,
        breakpoints,
        f_spectrum,
    })
}

/// Cosine coefficients of `f` with Simpson applied on each smooth piece.
pub fn piecewise_spectrum(
    f: fn(f64) -> f64,
    breakpoints: &[f64],
    max_mode: usize,
) -> Result<CosineSpectrum> {
    let mut edges = vec![0.0];
    edges.extend_from_slice(breakpoints);
    edges.push(1.0);
    let coeffs = (0..=max_mode)
        .map(|m| {
            let w = m as f64 * PI;
            let total = edges
                .windows(2)
                .map(|e| {
                    // evaluate just inside each piece so jumps take the piece's own limit
                    let (a, b) = (e[0], e[1]);
                    let g = |x: f64| f(x.clamp(a + 1e-14, b - 1e-14)) * (w * x).cos();
                    simpson_fn(g, a, b, CELLS_PER_PIECE)
                })
                .sum::<Result<f64>>()?;
            Ok(if m == 0 { total } else { 2.0 * total })
        })
        .collect::<Result<Vec<_>>>()?;
    CosineSpectrum::new(coeffs)
}

impl BuiltinExample {
    pub fn f_true(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn f_on(&self, grid: &Grid1D) -> Result<GridFunction> {
        GridFunction::from_fn(*grid, self.f)
    }

    pub fn breakpoints(&self) -> &'static [f64] {
        self.breakpoints
    }

    /// Exact coefficients for `ex1`, a 200-mode reference otherwise.
    pub fn f_spectrum(&self) -> &CosineSpectrum {
        &self.f_spectrum
    }

    /// Reference field `u` driven by [`Self::f_spectrum`].
    pub fn field(&self) -> Result<SeriesField<'_>> {
        let initial = self.spec.initial_spectrum(DEFAULT_INITIAL_MODES)?;
        SeriesField::new(&self.spec, initial, self.f_spectrum.clone())
    }

    /// Closed-form `u(x, t)`, available for `ex1` at `k = T = 1`.
    pub fn closed_form_u(&self, x: f64, t: f64) -> Option<f64> {
        if self.id != ExampleId::Ex1 || self.spec.k() != 1.0 {
            return None;
        }
        let p2 = PI * PI;
        let mode = |r: f64| (r * t - 1.0 + (-r * t).exp()) / (r * r);
        Some(
            (2.0 * PI * x).cos() * (-4.0 * p2 * t).exp()
                + t * t / 2.0
                + mode(9.0 * p2) * (3.0 * PI * x).cos()
                + 2.0 * mode(25.0 * p2) * (5.0 * PI * x).cos(),
        )
    }
}
