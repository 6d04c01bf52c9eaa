use thiserror::Error;

use crate::iterative::TraceRow;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("composite Simpson needs an even number of cells, got {0}")]
    OddCellCount(usize),

    #[error("mode {m_max} is not resolved on {n_cells} cells (need at least {required})")]
    Resolution {
        m_max: usize,
        n_cells: usize,
        required: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("inversion kernel vanishes at frequency {xi} (|kernel| = {kernel:e})")]
    SingularKernel { xi: f64, kernel: f64 },

    #[error("mode {m} is unrecoverable: |kernel| = {kernel:e} is below the relative threshold")]
    SingularMode { m: usize, kernel: f64 },

    #[error("Gaussian tail beyond half width {half_width} is {tail:e}, above 1e-12")]
    TailBound { half_width: f64, tail: f64 },

    #[error("discrepancy level not reached within {n_max} iterations")]
    NonConvergence { n_max: usize, trace: Vec<TraceRow> },

    #[error("unknown example '{0}' (expected ex1, ex2 or ex3)")]
    UnknownExample(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical modules, as opposed to I/O or
    /// configuration problems.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::Csv(_) | Error::Config(_) | Error::UnknownExample(_)
        )
    }
}
