//! Regularization parameters and the parameter-choice rules shared by the
//! cut-off and iterative methods.
//!
//! With `L = ln(M/δ)` the band limit is
//! `√( L · L^{-(1+σ)p/2} / ((1+σ) k T) )`, the a-priori stopping index is
//! `⌊(M/δ)^{1/N}⌋`, and the discrepancy factor is
//! `τ = C₁ M^{σ/(1+σ)} + (C_h + 1)/C_h · δ^{σ/(1+σ)}` with
//! `C₁ = L^{(1+σ)p²/2}`. The asymptotic `∼` in these rules is taken as
//! equality; `cutoff_scale` and `stop_scale` expose the missing constants.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    APriori,
    Discrepancy,
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "a-priori" | "apriori" => Ok(RuleKind::APriori),
            "discrepancy" => Ok(RuleKind::Discrepancy),
            other => Err(Error::Config(format!(
                "unknown stopping rule '{other}' (expected a-priori or discrepancy)"
            ))),
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::APriori => "a-priori",
            RuleKind::Discrepancy => "discrepancy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegConfig {
    /// Smoothness index of the source bound `‖f‖_p ≤ M`.
    pub p: f64,
    /// Slack exponent σ ≥ 0.
    pub sigma: f64,
    /// Source bound `M`.
    pub bound: f64,
    /// Mode cut-off ϑ; derived from the parameter rule when absent.
    pub theta: Option<usize>,
    /// Frequency cut-off ϑ₁ of the whole-line iteration.
    pub theta1: Option<f64>,
    /// Relaxation exponent `N` in `λ = v^{1/N}`.
    pub relaxation: u32,
    /// Discrepancy factor; derived from `(M, δ, p, σ, C_h)` when absent.
    pub tau: Option<f64>,
    pub rule: RuleKind,
    pub cutoff_scale: f64,
    pub stop_scale: f64,
    /// Iteration cap for the discrepancy rule.
    pub n_max: usize,
}

impl Default for RegConfig {
    fn default() -> Self {
        Self {
            p: 1.0 / 3.0,
            sigma: 0.2,
            bound: 1.870888,
            theta: None,
            theta1: None,
            relaxation: 2,
            tau: None,
            rule: RuleKind::Discrepancy,
            cutoff_scale: 1.0,
            stop_scale: 1.0,
            n_max: 100_000,
        }
    }
}

impl RegConfig {
    /// Mode cut-off: the configured ϑ, or the parameter rule at noise `delta`.
    pub fn theta_for(&self, delta: f64, k: f64, horizon: f64) -> Result<usize> {
        match self.theta {
            Some(theta) => Ok(theta),
            None => Ok(floor_index(
                self.cutoff_scale
                    * cutoff_frequency(self.bound, delta, k, horizon, self.p, self.sigma)?,
            )),
        }
    }

    /// Frequency cut-off ϑ₁ of the whole-line iteration.
    pub fn theta1_for(&self, delta: f64, k: f64, horizon: f64) -> Result<f64> {
        match self.theta1 {
            Some(theta1) => Ok(theta1),
            None => Ok(self.cutoff_scale
                * cutoff_frequency(self.bound, delta, k, horizon, self.p, self.sigma)?),
        }
    }

    pub fn a_priori_stop(&self, delta: f64) -> Result<usize> {
        let n = a_priori_stop(self.bound, delta, self.relaxation)?;
        Ok(floor_index(self.stop_scale * n as f64))
    }

    pub fn tau_for(&self, delta: f64, c_h: f64) -> Result<f64> {
        match self.tau {
            Some(tau) => Ok(tau),
            None => discrepancy_tau(self.bound, delta, self.p, self.sigma, c_h),
        }
    }
}

/// Floor that absorbs round-off just below an integer, so `1000^{1/3}` gives 10.
pub fn floor_index(x: f64) -> usize {
    let r = x.round();
    let snapped = if r > x && r - x <= 8.0 * f64::EPSILON * r {
        r
    } else {
        x.floor()
    };
    snapped.max(0.0) as usize
}

/// `ln(M/δ)`, requiring `M > δ > 0`.
pub fn log_ratio(bound: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && bound > delta && bound.is_finite()) {
        return Err(Error::Parameter(format!(
            "need M > δ > 0, got M = {bound}, δ = {delta}"
        )));
    }
    Ok((bound / delta).ln())
}

fn check_smoothness(p: f64, sigma: f64) -> Result<()> {
    if !(p >= 0.0 && sigma >= 0.0) {
        return Err(Error::Parameter(format!(
            "need p ≥ 0 and σ ≥ 0, got p = {p}, σ = {sigma}"
        )));
    }
    Ok(())
}

/// `√( L · L^{-(1+σ)p/2} / ((1+σ) k T) )` with `L = ln(M/δ)`.
pub fn cutoff_frequency(
    bound: f64,
    delta: f64,
    k: f64,
    horizon: f64,
    p: f64,
    sigma: f64,
) -> Result<f64> {
    check_smoothness(p, sigma)?;
    if !(k > 0.0 && horizon > 0.0) {
        return Err(Error::Parameter(format!(
            "need k > 0 and T > 0, got k = {k}, T = {horizon}"
        )));
    }
    let l = log_ratio(bound, delta)?;
    let bracket = l * l.powf(-(1.0 + sigma) * p / 2.0);
    Ok((bracket / ((1.0 + sigma) * k * horizon)).sqrt())
}

/// `⌊(M/δ)^{1/N}⌋`.
pub fn a_priori_stop(bound: f64, delta: f64, relaxation: u32) -> Result<usize> {
    log_ratio(bound, delta)?;
    if relaxation == 0 {
        return Err(Error::Parameter("relaxation exponent N must be ≥ 1".into()));
    }
    Ok(floor_index((bound / delta).powf(1.0 / relaxation as f64)))
}

/// `C₁ = (L / (L · L^{-(1+σ)p/2}))^p`.
pub fn discrepancy_c1(bound: f64, delta: f64, p: f64, sigma: f64) -> Result<f64> {
    check_smoothness(p, sigma)?;
    let l = log_ratio(bound, delta)?;
    Ok((l / (l * l.powf(-(1.0 + sigma) * p / 2.0))).powf(p))
}

/// `τ = C₁ M^{σ/(1+σ)} + (C_h + 1)/C_h · δ^{σ/(1+σ)}`.
pub fn discrepancy_tau(bound: f64, delta: f64, p: f64, sigma: f64, c_h: f64) -> Result<f64> {
    if !(c_h > 0.0) {
        return Err(Error::Parameter(format!("C_h must be positive, got {c_h}")));
    }
    let c1 = discrepancy_c1(bound, delta, p, sigma)?;
    let e = sigma / (1.0 + sigma);
    Ok(c1 * bound.powf(e) + (c_h + 1.0) / c_h * delta.powf(e))
}

/// `τ δ^{1/(1+σ)}`.
pub fn discrepancy_threshold(tau: f64, delta: f64, sigma: f64) -> f64 {
    tau * delta.powf(1.0 / (1.0 + sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn unit_log_ratio_gives_unit_band() {
        let v = cutoff_frequency(E, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_settings_by_substitution() {
        let (m, d, p, s) = (1.870888f64, 0.003035f64, 1.0 / 3.0, 0.2f64);
        let l = (m / d).ln();
        let expected = ((l * l.powf(-0.6 * p)) / 1.2).sqrt();
        let got = cutoff_frequency(m, d, 1.0, 1.0, p, s).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 1.9204).abs() < 1e-3, "{got}");
    }

    #[test]
    fn band_grows_as_noise_shrinks() {
        let mut prev = 0.0;
        for i in 0..30 {
            let delta = 0.5f64.powi(i + 2);
            let v = cutoff_frequency(1.0, delta, 1.0, 1.0, 1.0 / 3.0, 0.2).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn rejects_bound_below_noise() {
        assert!(matches!(
            cutoff_frequency(0.001, 0.01, 1.0, 1.0, 0.0, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(a_priori_stop(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn a_priori_index() {
        assert_eq!(a_priori_stop(1.87, 0.003, 2).unwrap(), 24);
        assert_eq!(a_priori_stop(100.0, 1.0, 1).unwrap(), 100);
        assert_eq!(a_priori_stop(1000.0, 1.0, 3).unwrap(), 10);
    }

    #[test]
    fn tau_by_substitution() {
        let (m, d, p, s, c_h) = (1.87f64, 0.003f64, 1.0f64 / 3.0, 0.2f64, 0.5f64);
        let l = (m / d).ln();
        let c1 = (l / (l * l.powf(-(1.0 + s) * p / 2.0))).powf(p);
        let expected = c1 * m.powf(s / (1.0 + s)) + (c_h + 1.0) / c_h * d.powf(s / (1.0 + s));
        let got = discrepancy_tau(m, d, p, s, c_h).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 2.39).abs() < 0.02, "{got}");
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("a-priori".parse::<RuleKind>().unwrap(), RuleKind::APriori);
        assert_eq!("a_priori".parse::<RuleKind>().unwrap(), RuleKind::APriori);
        assert_eq!(
            "Discrepancy".parse::<RuleKind>().unwrap(),
            RuleKind::Discrepancy
        );
        assert!("tikhonov".parse::<RuleKind>().is_err());
    }
}
