//! Recovery of the spatial source `f(x)` in the heat equation
//! `u_t = k u_xx + f(x) h(t)` from a final-time observation `u(x, T)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`cosine`]: uniform grids, composite Simpson quadrature and the cosine
//!   expansion on `[0, 1]` that every Neumann computation is expressed in.
//! * [`time_profile`]: the known temporal factor `h(t)` and the exponentially
//!   weighted kernel integrals, evaluated with non-positive exponents only.
//! * [`forward`]: the direct Neumann problem as a cosine series, plus the
//!   fundamental-solution form used as a validation oracle.
//! * [`line`]: the whole-line problem represented on a frequency band.
//! * [`iterative`]: relaxed iteration with a-priori and discrepancy stopping.
//! * [`cutoff`]: frequency cut-off reconstruction for the Neumann problem.
//! * [`noise`]: seeded multiplicative measurement noise.
//! * [`experiments`]: built-in test problems, the convergence table batch,
//!   CSV writers and the flat config format used by the CLI.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cosine;
pub mod cutoff;
pub mod error;
pub mod experiments;
pub mod forward;
pub mod iterative;
pub mod line;
pub mod noise;
pub mod params;
pub mod problem;
pub mod time_profile;

pub use cosine::{analyze, hp_norm, l2_norm, synthesize, CosineSpectrum, Grid1D, GridFunction};
pub use error::{Error, Result};
pub use problem::{DomainMode, LineTruncation, ProblemSpec};
pub use time_profile::TimeProfile;
