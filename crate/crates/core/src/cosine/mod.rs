//! Discrete substrate on `[0, 1]`: grids, composite Simpson quadrature and
//! cosine expansions `g(x) = d_0 + Σ_{m≥1} d_m cos(mπx)`.

mod grid;
pub mod quadrature;
mod spectrum;

pub use grid::{Grid1D, GridFunction};
pub use spectrum::{
    analyze, analyze_with, hp_norm, l2_norm, synthesize, CosineSpectrum, Resolution,
};
