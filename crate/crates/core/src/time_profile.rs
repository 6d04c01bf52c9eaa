//! The known temporal factor `h(t)` on `[0, T]` and its kernel integrals.
//!
//! Every integral is computed panel by panel on the composite Simpson
//! partition of the sample grid: on each two-cell panel `h` is replaced by
//! its quadratic interpolant, which is then integrated exactly against the
//! weight at hand. With a unit weight this is plain composite Simpson; with
//! the weight `e^{-rate (t - s)}` it stays accurate however large the rate
//! is relative to the grid spacing, and every exponential evaluated has a
//! non-positive argument.

use crate::cosine::{Grid1D, GridFunction};
use crate::error::{Error, Result};

/// Panels further than this many e-foldings behind `t` contribute below
/// `e^{-60}` of their own size and are skipped.
const MAX_LAG: f64 = 60.0;

#[derive(Debug, Clone)]
pub struct TimeProfile {
    samples: GridFunction,
    single_signed: bool,
    total_abs_mass: f64,
}

impl TimeProfile {
    pub const DEFAULT_CELLS: usize = 1000;

    /// Samples an analytic `h` on the default dense grid over `[0, horizon]`.
    pub fn from_fn(horizon: f64, h: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn_with_cells(horizon, Self::DEFAULT_CELLS, h)
    }

    pub fn from_fn_with_cells(
        horizon: f64,
        n_cells: usize,
        h: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::Parameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Self::from_samples(GridFunction::from_fn(
            Grid1D::new(0.0, horizon, n_cells)?,
            h,
        )?)
    }

    /// Uses raw samples on a grid over `[0, T]` with an even number of cells.
    pub fn from_samples(samples: GridFunction) -> Result<Self> {
        let grid = samples.grid();
        if grid.lo() != 0.0 {
            return Err(Error::Domain(format!(
                "time samples must start at t = 0, got {}",
                grid.lo()
            )));
        }
        if !grid.n_cells().is_multiple_of(2) {
            return Err(Error::OddCellCount(grid.n_cells()));
        }
        let values = samples.values();
        let single_signed = !(values.iter().any(|&v| v > 0.0) && values.iter().any(|&v| v < 0.0));
        let mut profile = Self {
            samples,
            single_signed,
            total_abs_mass: 0.0,
        };
        profile.total_abs_mass = profile.abs_mass_unchecked(profile.horizon());
        if !(profile.total_abs_mass > 0.0) {
            return Err(Error::Parameter(
                "h must not vanish identically (C_h = 0)".into(),
            ));
        }
        if !single_signed {
            log::warn!("h(t) changes sign on [0, T]; convergence guarantees assume a single sign");
        }
        Ok(profile)
    }

    pub fn horizon(&self) -> f64 {
        self.samples.grid().hi()
    }

    pub fn samples(&self) -> &GridFunction {
        &self.samples
    }

    pub fn is_single_signed(&self) -> bool {
        self.single_signed
    }

    /// `C_h = ∫₀ᵀ |h(s)| ds`.
    pub fn total_abs_mass(&self) -> f64 {
        self.total_abs_mass
    }

    /// `∫₀ᵗ h(s) e^{-rate (t - s)} ds` for `rate ≥ 0`, `0 < t ≤ T`.
    pub fn decayed_kernel(&self, rate: f64, t: f64) -> Result<f64> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Parameter(format!(
                "decay rate must be finite and ≥ 0, got {rate}"
            )));
        }
        let t = self.check_time(t)?;
        let (full, tail) = self.partition(t);
        let mut acc = 0.0;
        if tail {
            acc += self.weighted_panel(full, t, rate);
        }
        for q in (0..full).rev() {
            let b = self.node(2 * q + 2);
            let lag = rate * (t - b);
            if lag > MAX_LAG {
                break;
            }
            acc += (-lag).exp() * self.weighted_panel(q, b, rate);
        }
        Ok(acc)
    }

    /// `∫₀ᵗ |h(s)| ds` for `0 < t ≤ T`.
    pub fn abs_mass(&self, t: f64) -> Result<f64> {
        let t = self.check_time(t)?;
        Ok(self.abs_mass_unchecked(t))
    }

    fn abs_mass_unchecked(&self, t: f64) -> f64 {
        let (full, tail) = self.partition(t);
        let mut acc: f64 = (0..full)
            .map(|q| self.abs_panel(q, self.node(2 * q + 2)))
            .sum();
        if tail {
            acc += self.abs_panel(full, t);
        }
        acc
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let horizon = self.horizon();
        if !(t > 0.0) || t > horizon * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("t = {t} outside (0, {horizon}]")));
        }
        Ok(t.min(horizon))
    }

    fn node(&self, i: usize) -> f64 {
        self.samples.grid().node(i)
    }

    /// Number of complete panels inside `[0, t]` and whether a partial panel
    /// `[s_{2·full}, t]` remains.
    fn partition(&self, t: f64) -> (usize, bool) {
        let grid = self.samples.grid();
        let pos = t / grid.spacing();
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            let j = nearest as usize;
            (j / 2, j % 2 == 1)
        } else {
            (pos.floor() as usize / 2, true)
        }
    }

    fn panel_values(&self, q: usize) -> ([f64; 3], [f64; 3]) {
        let v = self.samples.values();
        let i = 2 * q;
        (
            [self.node(i), self.node(i + 1), self.node(i + 2)],
            [v[i], v[i + 1], v[i + 2]],
        )
    }

    /// `∫_{s_{2q}}^{b} p(s) e^{-rate (b - s)} ds` with `p` the panel's
    /// quadratic interpolant.
    fn weighted_panel(&self, q: usize, b: f64, rate: f64) -> f64 {
        let (s, v) = self.panel_values(q);
        let y = [b - s[0], b - s[1], b - s[2]];
        let [c0, c1, c2] = monomial_coeffs(y, v);
        let [j0, j1, j2] = exp_moments(rate, b - s[0]);
        c0 * j0 + c1 * j1 + c2 * j2
    }

    /// `∫_{s_{2q}}^{b} |h(s)| ds`. Panels where the quadratic interpolant
    /// keeps one sign use it directly; around a sign change a cubic through
    /// one extra neighbouring node keeps the kink of `|h|` accurate.
    fn abs_panel(&self, q: usize, b: f64) -> f64 {
        let (s, v) = self.panel_values(q);
        let end = b - s[0];
        let quad = monomial_coeffs([0.0, s[1] - s[0], s[2] - s[0]], v);
        let poly = if polynomial_sign_changes(&quad, end) {
            let n = self.samples.grid().n_cells();
            let extra = if 2 * q + 3 <= n { 2 * q + 3 } else { 2 * q - 1 };
            let xs = [0.0, s[1] - s[0], s[2] - s[0], self.node(extra) - s[0]];
            let vs = [v[0], v[1], v[2], self.samples.values()[extra]];
            cubic_coeffs(xs, vs).to_vec()
        } else {
            quad.to_vec()
        };
        abs_integral(&poly, end)
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn polynomial_sign_changes(c: &[f64], end: f64) -> bool {
    const PROBES: usize = 32;
    let first = poly_eval(c, 0.0);
    (1..=PROBES).any(|i| poly_eval(c, end * i as f64 / PROBES as f64) * first < 0.0)
}

/// `∫₀^end |p(x)| dx` for a polynomial given by monomial coefficients.
fn abs_integral(c: &[f64], end: f64) -> f64 {
    const PROBES: usize = 32;
    let antiderivative = |x: f64| {
        c.iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, ci)| acc * x + ci / (i + 1) as f64)
            * x
    };
    let mut cuts = vec![0.0];
    let probe = |i: usize| end * i as f64 / PROBES as f64;
    for i in 0..PROBES {
        let (mut lo, mut hi) = (probe(i), probe(i + 1));
        let mut f_lo = poly_eval(c, lo);
        if f_lo * poly_eval(c, hi) >= 0.0 {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let f_mid = poly_eval(c, mid);
            if f_lo * f_mid <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
        }
        cuts.push(0.5 * (lo + hi));
    }
    cuts.push(end);
    cuts.windows(2)
        .map(|w| (antiderivative(w[1]) - antiderivative(w[0])).abs())
        .sum()
}

/// Monomial coefficients of the cubic through four points.
fn cubic_coeffs(x: [f64; 4], v: [f64; 4]) -> [f64; 4] {
    // Newton divided differences, then expand.
    let mut d = v;
    for level in 1..4 {
        for i in (level..4).rev() {
            d[i] = (d[i] - d[i - 1]) / (x[i] - x[i - level]);
        }
    }
    let mut c = [0.0; 4];
    // Horner-style expansion of d0 + d1(x-x0) + d2(x-x0)(x-x1) + d3(x-x0)(x-x1)(x-x2).
    for i in (0..4).rev() {
        // c <- c * (X - x_i) + d_i
        let mut next = [0.0; 4];
        for j in 0..4 {
            if j + 1 < 4 {
                next[j + 1] += c[j];
            }
            next[j] -= c[j] * x[i];
        }
        next[0] += d[i];
        c = next;
    }
    c
}

/// Coefficients of the quadratic through `(x_i, v_i)` in the monomial basis.
fn monomial_coeffs(x: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    let d1 = (v[1] - v[0]) / (x[1] - x[0]);
    let d12 = (v[2] - v[1]) / (x[2] - x[1]);
    let d2 = (d12 - d1) / (x[2] - x[0]);
    [
        v[0] - d1 * x[0] + d2 * x[0] * x[1],
        d1 - d2 * (x[0] + x[1]),
        d2,
    ]
}

/// `J_k = ∫₀^L y^k e^{-r y} dy` for `k = 0, 1, 2`.
fn exp_moments(r: f64, len: f64) -> [f64; 3] {
    let x = r * len;
    if x < 1.0 {
        // Alternating series; closed forms cancel badly for small r·L.
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut term = 1.0;
            let mut sum = 0.0;
            for j in 0..40 {
                let contrib = term / (k + j + 1) as f64;
                sum += contrib;
                if contrib.abs() < 1e-18 * sum.abs() {
                    break;
                }
                term *= -x / (j + 1) as f64;
            }
            *slot = len.powi(k as i32 + 1) * sum;
        }
        out
    } else {
        let e = (-x).exp();
        [
            (1.0 - e) / r,
            (1.0 - e * (1.0 + x)) / (r * r),
            (2.0 - e * (2.0 + 2.0 * x + x * x)) / (r * r * r),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oracle_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let c = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += c * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    fn ex2(s: f64) -> f64 {
        5.0 * (2.0 * PI * s).sin() + 1.0
    }

    fn ex3(s: f64) -> f64 {
        s.exp() + 6.0 * (4.0 * PI * s).sin() + s * s + 1.0
    }

    #[test]
    fn constant_profile_plain_integral() {
        let h = TimeProfile::from_fn(1.0, |_| 1.0).unwrap();
        assert!((h.decayed_kernel(0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((h.abs_mass(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(h.is_single_signed());
    }

    #[test]
    fn linear_profile_mode_three_factor() {
        let h = TimeProfile::from_fn(1.0, |s| s).unwrap();
        let r = 9.0 * PI * PI;
        let closed = (r - 1.0 + (-r).exp()) / (r * r);
        let got = h.decayed_kernel(r, 1.0).unwrap();
        assert!((got - closed).abs() < 1e-15, "{got} vs {closed}");
        assert!((h.abs_mass(1.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_profile_exact_off_grid_and_at_huge_rates() {
        let h = TimeProfile::from_fn_with_cells(1.0, 200, |s| s).unwrap();
        for &t in &[0.0137, 0.25, 0.5001, 0.999] {
            for &r in &[0.0f64, 3.0, 1e3, 1e5] {
                let closed = if r == 0.0 {
                    t * t / 2.0
                } else {
                    (r * t - 1.0 + (-r * t).exp()) / (r * r)
                };
                let got = h.decayed_kernel(r, t).unwrap();
                assert!(
                    (got - closed).abs() <= 1e-13 * closed.abs().max(1e-3),
                    "t={t} r={r}"
                );
            }
        }
    }

    #[test]
    fn sign_changing_profile_against_fine_oracle() {
        let h = TimeProfile::from_fn(1.0, ex2).unwrap();
        assert!(!h.is_single_signed());
        let r = 25.0 * PI * PI;
        let oracle = oracle_simpson(|s| ex2(s) * (-r * (1.0 - s)).exp(), 0.0, 1.0, 100_000);
        let got = h.decayed_kernel(r, 1.0).unwrap();
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
    }

    #[test]
    fn abs_mass_of_sign_changing_profile() {
        let h = TimeProfile::from_fn(1.0, ex3).unwrap();
        // Oracle: bracket the sign changes by bisection, then Simpson on each piece.
        let mut cuts = vec![0.0];
        let n = 4000;
        for i in 0..n {
            let (mut a, mut b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            if ex3(a) * ex3(b) < 0.0 {
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if ex3(a) * ex3(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                cuts.push(0.5 * (a + b));
            }
        }
        cuts.push(1.0);
        let oracle: f64 = cuts
            .windows(2)
            .map(|w| oracle_simpson(|s| ex3(s).abs(), w[0], w[1], 20_000))
            .sum();
        let got = h.abs_mass(1.0).unwrap();
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
        assert_eq!(got, h.total_abs_mass());
    }

    #[test]
    fn time_outside_horizon_is_a_domain_error() {
        let h = TimeProfile::from_fn(1.0, |s| s).unwrap();
        assert!(matches!(h.decayed_kernel(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(h.decayed_kernel(1.0, 1.5), Err(Error::Domain(_))));
        assert!(matches!(h.abs_mass(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn vanishing_profile_is_rejected() {
        assert!(TimeProfile::from_fn(1.0, |_| 0.0).is_err());
        assert!(TimeProfile::from_fn_with_cells(1.0, 201, |s| s).is_err());
    }

    #[test]
    fn kernel_bounded_by_abs_mass_and_decays() {
        for profile in [
            TimeProfile::from_fn(1.0, |s| s).unwrap(),
            TimeProfile::from_fn(1.0, ex2).unwrap(),
            TimeProfile::from_fn(1.0, ex3).unwrap(),
        ] {
            for &t in &[0.1, 0.55, 1.0] {
                let mass = profile.abs_mass(t).unwrap();
                for &r in &[0.0, 0.5, 10.0, 1e3, 1e6] {
                    let k = profile.decayed_kernel(r, t).unwrap();
                    assert!(k.abs() <= mass * (1.0 + 1e-12));
                }
                assert!(profile.decayed_kernel(1e6, t).unwrap().abs() < 1e-3 * mass);
            }
        }
    }

    #[test]
    fn single_signed_kernel_decreases_with_rate() {
        let h = TimeProfile::from_fn(1.0, |s| (-s).exp() + 0.2).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let r = 0.25 * i as f64 * (1.0 + 0.1 * i as f64);
            let k = h.decayed_kernel(r, 0.8).unwrap();
            assert!(k < prev);
            prev = k;
        }
    }
}
