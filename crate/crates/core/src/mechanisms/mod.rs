//! Noise primitives, selection mechanisms and per-node budget arithmetic.

mod budget;
mod noise;
mod selection;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use budget::PrivacyBudget;
pub use noise::NoiseSource;
pub use selection::{exponential_mechanism, exponential_weights, noisy_max_report, Direction};

/// How the learner privatizes rule selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismKind {
    SmoothLaplace,
    SmoothCauchy,
    GlobalLaplace,
    GlobalGaussian,
    Exponential,
    NoisyCounts,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 6] = [
        MechanismKind::SmoothLaplace,
        MechanismKind::SmoothCauchy,
        MechanismKind::GlobalLaplace,
        MechanismKind::GlobalGaussian,
        MechanismKind::Exponential,
        MechanismKind::NoisyCounts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::SmoothLaplace => "sm-laplace",
            MechanismKind::SmoothCauchy => "sm-cauchy",
            MechanismKind::GlobalLaplace => "gl-laplace",
            MechanismKind::GlobalGaussian => "gl-gaussian",
            MechanismKind::Exponential => "exponential",
            MechanismKind::NoisyCounts => "noisy-counts",
        }
    }

    /// Whether selection noise is calibrated to the smooth sensitivity.
    pub fn is_smooth(self) -> bool {
        matches!(self, MechanismKind::SmoothLaplace | MechanismKind::SmoothCauchy)
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MechanismKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown mechanism `{s}`")))
    }
}

/// Global sensitivity of the Gini impurity.
pub const GINI_GLOBAL_SENSITIVITY: f64 = 0.5;

/// `value + Lap(Δ₁/ε)`.
pub fn mech_laplace_global(value: f64, delta1: f64, epsilon: f64, source: &mut NoiseSource) -> f64 {
    value + source.laplace(delta1 / epsilon)
}

/// Calibration constant `c = √(2 ln(1.25/δ))`, nudged up so `c² > 2 ln(1.25/δ)`.
pub fn gaussian_c(delta: f64) -> f64 {
    (2.0 * (1.25 / delta).ln()).sqrt() * (1.0 + 1e-9)
}

pub fn gaussian_sigma(delta2: f64, epsilon: f64, delta: f64) -> f64 {
    gaussian_c(delta) * delta2 / epsilon
}

/// `value + N(0, σ)` with `σ = c·Δ₂/ε`.
///
/// The classic calibration is only proven for `ε < 1`; callers outside
/// that range get the same formula.
pub fn mech_gaussian_global(value: f64, delta2: f64, epsilon: f64, delta: f64, source: &mut NoiseSource) -> f64 {
    value + source.gaussian(gaussian_sigma(delta2, epsilon, delta))
}

/// `value + (2S*/ε)·Lap(1)`.
pub fn mech_laplace_smooth(value: f64, s_star: f64, epsilon: f64, source: &mut NoiseSource) -> f64 {
    value + (2.0 * s_star / epsilon) * source.standard_laplace()
}

/// `value + (2(γ+1)S*/ε)·η` with `η ∝ 1/(1+|z|^γ)`.
pub fn mech_cauchy_smooth(value: f64, s_star: f64, epsilon: f64, gamma: f64, source: &mut NoiseSource) -> Result<f64> {
    Ok(value + (2.0 * (gamma + 1.0) * s_star / epsilon) * source.cauchy(gamma)?)
}

/// The largest `β` the smooth Cauchy mechanism tolerates at `ε`.
pub fn cauchy_beta_limit(epsilon: f64, gamma: f64) -> f64 {
    epsilon / (2.0 * (gamma + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in MechanismKind::ALL {
            assert_eq!(m.name().parse::<MechanismKind>().unwrap(), m);
        }
        assert!("laplace".parse::<MechanismKind>().is_err());
    }

    #[test]
    fn gaussian_constants() {
        assert!((gaussian_c(0.05) - 2.537).abs() < 1e-3);
        assert!((gaussian_sigma(1.0, 1.0, 1e-6) - 5.30).abs() < 5e-3);
        let c = gaussian_c(1e-5);
        assert!(c * c > 2.0 * (1.25e5f64).ln());
    }

    #[test]
    fn gaussian_mechanism_is_unbiased() {
        let mut s = NoiseSource::new(21);
        let sigma = gaussian_sigma(1.0, 0.5, 1e-3);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| mech_gaussian_global(3.0, 1.0, 0.5, 1e-3, &mut s))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 3.0).abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn laplace_mechanisms() {
        let mut s = NoiseSource::new(22);
        for _ in 0..100 {
            assert!((mech_laplace_global(1.5, 0.5, 1e9, &mut s) - 1.5).abs() < 1e-6);
        }
        assert_eq!(mech_laplace_smooth(0.25, 0.0, 1.0, &mut s), 0.25);
        assert_eq!(mech_cauchy_smooth(0.25, 0.0, 1.0, 2.0, &mut s).unwrap(), 0.25);
        // scale 2S*/ε = 0.2 shows up as E|noise|
        let n = 100_000;
        let m = (0..n)
            .map(|_| mech_laplace_smooth(0.0, 0.1, 1.0, &mut s).abs())
            .sum::<f64>()
            / n as f64;
        assert!((m - 0.2).abs() < 0.005);
    }

    #[test]
    fn cauchy_mechanism_median() {
        let mut s = NoiseSource::new(23);
        let mut d: Vec<f64> = (0..100_000)
            .map(|_| mech_cauchy_smooth(0.7, 0.01, 1.0, 2.0, &mut s).unwrap())
            .collect();
        d.sort_by(f64::total_cmp);
        assert!((d[d.len() / 2] - 0.7).abs() < 0.02);
        assert!((cauchy_beta_limit(1.2, 2.0) - 0.2).abs() < 1e-15);
    }
}
