//! Truncated two-mode squeezed vacuum and the cavity field left behind after
//! each mode is coupled into its cavity through a beam splitter.
//!
//! The squeezed vacuum has Fock amplitudes `tanh(s)^n / cosh(s)` on `|n, n>`.
//! A beam splitter of angle `theta` keeps `n - k` of `n` photons in a cavity
//! with amplitude
//!
//! ```text
//! C_k^n(theta) = sqrt(n! / (k! (n - k)!)) cos^k(theta / 2) sin^(n - k)(theta / 2)
//! ```
//!
//! and the two-cavity field becomes the mixture
//!
//! ```text
//! rho_F = sum_{n,m} sum_{k,l <= min(n,m)} w(n, m, k, l) |n-k><m-k| (x) |n-l><m-l|
//! w(n, m, k, l) = tanh(s)^(n+m) / cosh(s)^2 * C_k^n C_k^m C_l^n C_l^m
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_WEIGHT_TOLERANCE: f64 = 1e-10;

/// Off-diagonal weights smaller than this are omitted from [`field_weights`].
pub const WEIGHT_DROP_THRESHOLD: f64 = 1e-14;

/// Largest cutoff the automatic `n_max` search will consider.
const N_MAX_CEILING: usize = 4096;

/// How each field mode is coupled into its cavity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    /// Every photon enters the cavity: `C_k^n = delta_{k0}` and the cavities
    /// hold the pure two-mode squeezed vacuum. Equivalent to `theta = pi`.
    Full,
    /// Beam-splitter angle in radians, `0 <= theta <= pi`.
    Angle(f64),
}

impl Injection {
    pub fn theta(self) -> f64 {
        match self {
            Injection::Full => PI,
            Injection::Angle(theta) => theta,
        }
    }

    /// Beam-splitter amplitude `C_k^n` for this coupling. Exact Kronecker delta
    /// for [`Injection::Full`].
    pub fn coefficient(self, n: usize, k: usize) -> Result<f64> {
        match self {
            Injection::Full => {
                if k > n {
                    return Err(Error::domain(format!("C_k^n requires k <= n (k = {k}, n = {n})")));
                }
                Ok(if k == 0 { 1.0 } else { 0.0 })
            }
            Injection::Angle(theta) => cnk(n, k, theta),
        }
    }
}

/// `sqrt(n choose k)` by multiplicative recurrence, no factorials.
pub fn binom_coeff(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("binomial requires k <= n (k = {k}, n = {n})")));
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 1..=k {
        acc *= ((n - k + i) as f64 / i as f64).sqrt();
    }
    Ok(acc)
}

/// Beam-splitter amplitude `C_k^n(theta)`.
pub fn cnk(n: usize, k: usize, theta: f64) -> Result<f64> {
    let b = binom_coeff(n, k)?;
    let half = 0.5 * theta;
    Ok(b * powu(half.cos(), k) * powu(half.sin(), n - k))
}

/// `G_kl^nm(theta) = C_k^n C_k^m C_l^n C_l^m`.
pub fn g_weight(n: usize, m: usize, k: usize, l: usize, theta: f64) -> Result<f64> {
    check_loss_indices(n, m, k, l)?;
    Ok(cnk(n, k, theta)? * cnk(m, k, theta)? * cnk(n, l, theta)? * cnk(m, l, theta)?)
}

fn g_weight_injection(n: usize, m: usize, k: usize, l: usize, inj: Injection) -> Result<f64> {
    check_loss_indices(n, m, k, l)?;
    Ok(inj.coefficient(n, k)?
        * inj.coefficient(m, k)?
        * inj.coefficient(n, l)?
        * inj.coefficient(m, l)?)
}

fn check_loss_indices(n: usize, m: usize, k: usize, l: usize) -> Result<()> {
    let lim = n.min(m);
    if k > lim || l > lim {
        return Err(Error::domain(format!(
            "loss indices must satisfy k, l <= min(n, m) (n = {n}, m = {m}, k = {k}, l = {l})"
        )));
    }
    Ok(())
}

fn powu(x: f64, e: usize) -> f64 {
    match i32::try_from(e) {
        Ok(e) => x.powi(e),
        Err(_) => x.powf(e as f64),
    }
}

/// Smallest cutoff `N >= 1` whose geometric tail `tanh(s)^(2(N+1))` is at most
/// `tolerance`.
pub fn default_n_max(s: f64, tolerance: f64) -> Result<usize> {
    let t2 = s.tanh().powi(2);
    let mut tail = t2 * t2; // N = 1
    let mut n = 1;
    while tail > tolerance {
        n += 1;
        tail *= t2;
        if n > N_MAX_CEILING {
            return Err(Error::domain(format!(
                "no cutoff below {N_MAX_CEILING} reaches tolerance {tolerance:e} at s = {s}"
            )));
        }
    }
    Ok(n)
}

/// Squeeze parameter, cavity coupling and Fock truncation of the input field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedFieldSpec {
    pub s: f64,
    pub injection: Injection,
    /// Inclusive upper bound on the photon index `n`.
    pub n_max: usize,
    pub weight_tolerance: f64,
}

impl SqueezedFieldSpec {
    /// Field with the default tolerance and the automatically chosen cutoff.
    pub fn new(s: f64, injection: Injection) -> Result<Self> {
        Self::with_tolerance(s, injection, DEFAULT_WEIGHT_TOLERANCE)
    }

    pub fn with_tolerance(s: f64, injection: Injection, weight_tolerance: f64) -> Result<Self> {
        if !(weight_tolerance > 0.0 && weight_tolerance < 1.0) {
            return Err(Error::domain(format!(
                "weight_tolerance must lie in (0, 1), got {weight_tolerance}"
            )));
        }
        validate_s_theta(s, injection)?;
        let n_max = default_n_max(s, weight_tolerance)?;
        Ok(Self { s, injection, n_max, weight_tolerance })
    }

    /// Override the cutoff. The truncation itself is checked lazily by
    /// [`SqueezedFieldSpec::check_truncation`].
    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        self.n_max = n_max;
        Ok(self)
    }

    pub fn full(s: f64) -> Result<Self> {
        Self::new(s, Injection::Full)
    }

    pub fn theta(&self) -> f64 {
        self.injection.theta()
    }

    /// Mirror transmittance `cos^2(theta / 2)` as conventionally quoted.
    pub fn transmittance(&self) -> f64 {
        (0.5 * self.theta()).cos().powi(2)
    }

    /// Fock amplitude `tanh(s)^n / cosh(s)` of the squeezed vacuum.
    pub fn amplitude(&self, n: usize) -> f64 {
        powu(self.s.tanh(), n) / self.s.cosh()
    }

    /// Probability left outside the cutoff, `tanh(s)^(2(n_max+1))`.
    pub fn residual(&self) -> f64 {
        powu(self.s.tanh(), 2 * (self.n_max + 1))
    }

    pub fn check_truncation(&self) -> Result<()> {
        let residual = self.residual();
        if residual > self.weight_tolerance {
            return Err(Error::Truncation {
                residual,
                tolerance: self.weight_tolerance,
                n_max: self.n_max,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        validate_s_theta(self.s, self.injection)?;
        if self.n_max < 1 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        if !(self.weight_tolerance > 0.0 && self.weight_tolerance < 1.0) {
            return Err(Error::domain("weight_tolerance must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Amplitude of the `(k, l)` loss channel on the `n`-photon term:
    /// `tanh(s)^n / cosh(s) * C_k^n * C_l^n`. The weight tensor factorises as
    /// `w(n, m, k, l) = a_kl(n) a_kl(m)`.
    pub fn channel_amplitude(&self, n: usize, k: usize, l: usize) -> Result<f64> {
        Ok(self.amplitude(n) * self.injection.coefficient(n, k)? * self.injection.coefficient(n, l)?)
    }

    /// Largest loss index with a nonzero beam-splitter amplitude.
    pub fn max_loss(&self) -> usize {
        match self.injection {
            Injection::Full => 0,
            Injection::Angle(_) => self.n_max,
        }
    }
}

fn validate_s_theta(s: f64, injection: Injection) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::domain(format!("squeeze parameter must be finite and >= 0, got {s}")));
    }
    if let Injection::Angle(theta) = injection {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::domain(format!("theta must lie in [0, pi], got {theta}")));
        }
    }
    Ok(())
}

/// One term `w(n, m, k, l) |n-k><m-k| (x) |n-l><m-l|` of the cavity field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldWeight {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub l: usize,
    pub value: f64,
}

/// Enumerate every retained weight of the truncated cavity field.
///
/// Fails with [`Error::Truncation`] when the neglected tail exceeds the
/// tolerance.
pub fn field_weights(spec: &SqueezedFieldSpec) -> Result<Vec<FieldWeight>> {
    spec.validate()?;
    spec.check_truncation()?;
    let norm = 1.0 / spec.s.cosh().powi(2);
    let t = spec.s.tanh();
    let loss_cap = spec.max_loss();
    let mut out = Vec::new();
    for n in 0..=spec.n_max {
        for m in 0..=spec.n_max {
            let base = norm * powu(t, n + m);
            if base == 0.0 {
                continue;
            }
            let lim = n.min(m).min(loss_cap);
            for k in 0..=lim {
                for l in 0..=lim {
                    let value = base * g_weight_injection(n, m, k, l, spec.injection)?;
                    if value == 0.0 || (n != m && value.abs() < WEIGHT_DROP_THRESHOLD) {
                        continue;
                    }
                    out.push(FieldWeight { n, m, k, l, value });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binom_small_cases() {
        assert_eq!(binom_coeff(0, 0).unwrap(), 1.0);
        assert!((binom_coeff(4, 2).unwrap() - 6f64.sqrt()).abs() < 1e-15);
        assert!(matches!(binom_coeff(2, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn cnk_direct_substitution() {
        assert_eq!(cnk(0, 0, 1.234).unwrap(), 1.0);
        let v = cnk(2, 1, PI / 2.0).unwrap();
        assert!((v - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(cnk(1, 2, 0.3).is_err());
    }

    #[test]
    fn g_weight_trivial_values() {
        for n in 0..6 {
            let full = g_weight_injection(n, n, 0, 0, Injection::Full).unwrap();
            assert_eq!(full, 1.0);
            assert!((g_weight(n, n, 0, 0, PI).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((g_weight(1, 1, 1, 1, PI / 2.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(g_weight(2, 1, 2, 0, 0.4).is_err());
    }

    #[test]
    fn vacuum_field_is_single_weight() {
        let spec = SqueezedFieldSpec::full(0.0).unwrap();
        let w = field_weights(&spec).unwrap();
        assert_eq!(w, vec![FieldWeight { n: 0, m: 0, k: 0, l: 0, value: 1.0 }]);
    }

    #[test]
    fn default_cutoff_at_s_064() {
        let spec = SqueezedFieldSpec::full(0.64).unwrap();
        assert_eq!(spec.n_max, 20);
        assert!(spec.residual() <= 1e-10);
        let shorter = spec.with_n_max(19).unwrap();
        assert!(shorter.residual() > 1e-10);
    }

    #[test]
    fn diagonal_weights_follow_squeezed_vacuum() {
        let spec = SqueezedFieldSpec::full(0.64).unwrap();
        let w = field_weights(&spec).unwrap();
        let t2 = 0.64f64.tanh().powi(2);
        for fw in w.iter().filter(|fw| fw.n == fw.m) {
            assert_eq!((fw.k, fw.l), (0, 0));
            let expect = t2.powi(fw.n as i32) / 0.64f64.cosh().powi(2);
            assert!((fw.value - expect).abs() < 1e-15);
        }
        let w0 = w.iter().find(|fw| fw.n == 0 && fw.m == 0).unwrap();
        assert!((w0.value - 0.680_888_495_194_135_06).abs() < 1e-15);
    }

    #[test]
    fn short_cutoff_is_rejected() {
        let spec = SqueezedFieldSpec::full(0.64).unwrap().with_n_max(3).unwrap();
        match field_weights(&spec) {
            Err(Error::Truncation { residual, n_max, .. }) => {
                assert_eq!(n_max, 3);
                assert!((residual - 0.010_369_787_282_674_003).abs() < 1e-15);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SqueezedFieldSpec::full(-0.1).is_err());
        assert!(SqueezedFieldSpec::new(0.3, Injection::Angle(4.0)).is_err());
        assert!(SqueezedFieldSpec::full(0.3).unwrap().with_n_max(0).is_err());
    }

    #[test]
    fn partial_injection_trace_is_one() {
        let spec = SqueezedFieldSpec::new(0.5, Injection::Angle(2.0)).unwrap();
        let w = field_weights(&spec).unwrap();
        let tr: f64 = w.iter().filter(|fw| fw.n == fw.m).map(|fw| fw.value).sum();
        assert!((tr - 1.0).abs() <= spec.weight_tolerance);
        for fw in &w {
            assert!(fw.k <= fw.n.min(fw.m) && fw.l <= fw.n.min(fw.m));
            if fw.n == fw.m {
                assert!(fw.value >= 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn beam_splitter_rows_are_normalised(n in 0usize..60, theta in 0.0..PI) {
            let sum: f64 = (0..=n).map(|k| cnk(n, k, theta).unwrap().powi(2)).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn g_weight_symmetries(n in 0usize..25, m in 0usize..25, kf in 0.0..1.0f64, lf in 0.0..1.0f64,
                               theta in 0.0..PI) {
            let lim = n.min(m) as f64;
            let (k, l) = ((kf * lim).round() as usize, (lf * lim).round() as usize);
            let g = g_weight(n, m, k, l, theta).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(b.abs());
            prop_assert!(close(g, g_weight(m, n, k, l, theta).unwrap()));
            prop_assert!(close(g, g_weight(n, m, l, k, theta).unwrap()));
        }

        #[test]
        fn truncated_norm_within_tolerance(s in 0.0..1.2f64) {
            let spec = SqueezedFieldSpec::full(s).unwrap();
            let sum: f64 = (0..=spec.n_max).map(|n| spec.amplitude(n).powi(2)).sum();
            prop_assert!(sum <= 1.0 + 1e-15);
            prop_assert!(sum >= 1.0 - spec.weight_tolerance);
        }
    }
}
