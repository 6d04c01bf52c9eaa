//! Composite Simpson rule on uniform grids.

use crate::error::{Error, Result};

/// Simpson weights `h/3 · (1, 4, 2, 4, …, 2, 4, 1)` for `n_cells` cells.
pub fn simpson_weights(n_cells: usize, step: f64) -> Result<Vec<f64>> {
    if n_cells == 0 || !n_cells.is_multiple_of(2) {
        return Err(Error::OddCellCount(n_cells));
    }
    let third = step / 3.0;
    Ok((0..=n_cells)
        .map(|i| {
            if i == 0 || i == n_cells {
                third
            } else if i % 2 == 1 {
                4.0 * third
            } else {
                2.0 * third
            }
        })
        .collect())
}

/// Integrates equally spaced samples (`values.len() - 1` cells).
pub fn simpson(values: &[f64], step: f64) -> Result<f64> {
    let n_cells = values.len().saturating_sub(1);
    let weights = simpson_weights(n_cells, step)?;
    Ok(weights.iter().zip(values).map(|(w, v)| w * v).sum())
}

/// Integrates `f` over `[a, b]` with `n_cells` Simpson cells.
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, n_cells: usize) -> Result<f64> {
    if n_cells == 0 || !n_cells.is_multiple_of(2) {
        return Err(Error::OddCellCount(n_cells));
    }
    let step = (b - a) / n_cells as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n_cells {
        let x = a + step * i as f64;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    Ok(acc * step / 3.0)
}
