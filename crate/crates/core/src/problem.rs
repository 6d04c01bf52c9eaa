use crate::cosine::{analyze, CosineSpectrum, GridFunction};
use crate::error::{Error, Result};
use crate::time_profile::TimeProfile;

/// Frequency band `[-xi_max, xi_max]` split into `n_bins` equal intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineTruncation {
    pub xi_max: f64,
    pub n_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainMode {
    /// `0 < x < 1` with `u_x = 0` at both ends.
    NeumannUnitInterval,
    /// `x ∈ ℝ`, represented on a truncated frequency band.
    WholeLine(LineTruncation),
}

/// One instance of the source identification problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    k: f64,
    h: TimeProfile,
    mu0: GridFunction,
    f_true: Option<GridFunction>,
    domain: DomainMode,
}

impl ProblemSpec {
    /// Neumann problem on `[0, 1]`; the horizon is taken from `h`.
    pub fn neumann(k: f64, h: TimeProfile, mu0: GridFunction) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Parameter(format!(
                "conductivity must be positive, got {k}"
            )));
        }
        mu0.grid().require_unit_interval()?;
        Ok(Self {
            k,
            h,
            mu0,
            f_true: None,
            domain: DomainMode::NeumannUnitInterval,
        })
    }

    pub fn with_domain(mut self, domain: DomainMode) -> Result<Self> {
        if let DomainMode::WholeLine(t) = domain {
            if !(t.xi_max > 0.0) || t.n_bins == 0 || t.n_bins % 2 != 0 {
                return Err(Error::Parameter(format!(
                    "line truncation needs xi_max > 0 and an even bin count, got {t:?}"
                )));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_f_true(mut self, f: GridFunction) -> Result<Self> {
        f.grid().require_unit_interval()?;
        self.f_true = Some(f);
        Ok(self)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn horizon(&self) -> f64 {
        self.h.horizon()
    }

    pub fn h(&self) -> &TimeProfile {
        &self.h
    }

    pub fn mu0(&self) -> &GridFunction {
        &self.mu0
    }

    pub fn f_true(&self) -> Option<&GridFunction> {
        self.f_true.as_ref()
    }

    pub fn domain(&self) -> DomainMode {
        self.domain
    }

    pub(crate) fn require_neumann(&self) -> Result<()> {
        match self.domain {
            DomainMode::NeumannUnitInterval => Ok(()),
            DomainMode::WholeLine(_) => Err(Error::Domain(
                "operation needs the Neumann problem on [0, 1]".into(),
            )),
        }
    }

    /// Largest initial-state mode the `mu0` grid resolves (four nodes per
    /// half-wave).
    pub fn max_initial_mode(&self) -> usize {
        self.mu0.grid().n_cells() / 4
    }

    /// Cosine coefficients `a_m` of `mu0`, up to `requested` or to the
    /// largest resolvable mode, whichever is smaller.
    pub fn initial_spectrum(&self, requested: usize) -> Result<CosineSpectrum> {
        analyze(&self.mu0, requested.min(self.max_initial_mode()))
    }

    /// `e^{-m²π²k t}`, the decay of initial mode `m` after time `t`.
    pub fn mode_decay(&self, m: usize, t: f64) -> f64 {
        (-self.mode_rate(m) * t).exp()
    }

    /// `m²π²k`.
    pub fn mode_rate(&self, m: usize) -> f64 {
        let mpi = m as f64 * std::f64::consts::PI;
        mpi * mpi * self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosine::Grid1D;

    fn mu0() -> GridFunction {
        GridFunction::zeros(Grid1D::unit(100).unwrap())
    }

    #[test]
    fn rejects_bad_conductivity() {
        let h = TimeProfile::from_fn(1.0, |s| s).unwrap();
        assert!(ProblemSpec::neumann(0.0, h.clone(), mu0()).is_err());
        assert!(ProblemSpec::neumann(-1.0, h, mu0()).is_err());
    }

    #[test]
    fn initial_modes_are_clamped_to_grid() {
        let h = TimeProfile::from_fn(1.0, |s| s).unwrap();
        let spec = ProblemSpec::neumann(1.0, h, mu0()).unwrap();
        assert_eq!(spec.initial_spectrum(36).unwrap().max_mode(), 25);
        assert_eq!(spec.initial_spectrum(10).unwrap().max_mode(), 10);
    }

    #[test]
    fn whole_line_needs_even_bins() {
        let h = TimeProfile::from_fn(1.0, |s| s).unwrap();
        let spec = ProblemSpec::neumann(1.0, h, mu0()).unwrap();
        let bad = LineTruncation {
            xi_max: 4.0,
            n_bins: 7,
        };
        assert!(spec
            .clone()
            .with_domain(DomainMode::WholeLine(bad))
            .is_err());
        let good = LineTruncation {
            xi_max: 4.0,
            n_bins: 8,
        };
        let spec = spec.with_domain(DomainMode::WholeLine(good)).unwrap();
        assert!(spec.require_neumann().is_err());
    }
}
