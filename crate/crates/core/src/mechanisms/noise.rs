use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Seeded stream of random draws, owned by a single training run.
///
/// A silent source returns zero for every additive noise draw and makes
/// the exponential mechanism pick the argmax. It exists so tests can run
/// the private learners without noise.
#[derive(Clone, Debug)]
pub struct NoiseSource {
    seed: u64,
    rng: Option<ChaCha20Rng>,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        NoiseSource {
            seed,
            rng: Some(ChaCha20Rng::seed_from_u64(seed)),
        }
    }

    pub fn silent() -> Self {
        NoiseSource { seed: 0, rng: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_silent(&self) -> bool {
        self.rng.is_none()
    }

    /// Uniform draw in the open interval (0, 1); 0.5 when silent.
    pub fn uniform_open(&mut self) -> f64 {
        match &mut self.rng {
            Some(rng) => ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64),
            None => 0.5,
        }
    }

    /// Standard Laplace draw by inverting the CDF.
    pub fn standard_laplace(&mut self) -> f64 {
        if self.is_silent() {
            return 0.0;
        }
        let u = self.uniform_open() - 0.5;
        -u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }

    pub fn laplace(&mut self, scale: f64) -> f64 {
        scale * self.standard_laplace()
    }

    pub fn standard_gaussian(&mut self) -> f64 {
        match &mut self.rng {
            Some(rng) => StandardNormal.sample(rng),
            None => 0.0,
        }
    }

    pub fn gaussian(&mut self, sigma: f64) -> f64 {
        sigma * self.standard_gaussian()
    }

    /// Draw from the density proportional to `1 / (1 + |z|^γ)`, `γ > 1`.
    ///
    /// `γ = 2` is the standard Cauchy law, sampled as `tan(π(u − ½))`.
    /// Larger `γ` uses rejection from a Cauchy envelope (bound 2); `γ < 2`
    /// uses a symmetric Lomax envelope `∝ (1 + |z|)^{−γ}` (bound `2^{γ−1}`).
    pub fn cauchy(&mut self, gamma: f64) -> Result<f64> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::param(format!("cauchy exponent must exceed 1, got {gamma}")));
        }
        if self.is_silent() {
            return Ok(0.0);
        }
        let tan_draw = |s: &mut Self| (std::f64::consts::PI * (s.uniform_open() - 0.5)).tan();
        if gamma == 2.0 {
            return Ok(tan_draw(self));
        }
        loop {
            let (z, accept) = if gamma > 2.0 {
                let z = tan_draw(self);
                (z, (1.0 + z * z) / (2.0 * (1.0 + z.abs().powf(gamma))))
            } else {
                let mag = self.uniform_open().powf(-1.0 / (gamma - 1.0)) - 1.0;
                let z = if self.uniform_open() < 0.5 { -mag } else { mag };
                let ratio = (1.0 + mag).powf(gamma) / (1.0 + mag.powf(gamma));
                (z, ratio / 2f64.powf(gamma - 1.0))
            };
            if self.uniform_open() < accept {
                return Ok(z);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = NoiseSource::new(42);
        let mut b = NoiseSource::new(42);
        for _ in 0..100 {
            assert_eq!(a.laplace(1.0).to_bits(), b.laplace(1.0).to_bits());
            assert_eq!(a.gaussian(2.0).to_bits(), b.gaussian(2.0).to_bits());
            assert_eq!(a.cauchy(3.0).unwrap().to_bits(), b.cauchy(3.0).unwrap().to_bits());
        }
    }

    #[test]
    fn uniform_stays_open() {
        let mut s = NoiseSource::new(0);
        for _ in 0..10_000 {
            let u = s.uniform_open();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn silent_source_adds_nothing() {
        let mut s = NoiseSource::silent();
        assert_eq!(s.laplace(5.0), 0.0);
        assert_eq!(s.gaussian(5.0), 0.0);
        assert_eq!(s.cauchy(1.5).unwrap(), 0.0);
    }

    #[test]
    fn laplace_moments() {
        let mut s = NoiseSource::new(1);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| s.laplace(1.0)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        let mut s = NoiseSource::new(2);
        let abs_mean = (0..n).map(|_| s.laplace(2.0).abs()).sum::<f64>() / n as f64;
        assert!((abs_mean - 2.0).abs() < 0.05, "E|X| {abs_mean}");
    }

    #[test]
    fn gaussian_moments() {
        let mut s = NoiseSource::new(3);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| s.gaussian(1.5)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02 * 1.5);
        assert!((var.sqrt() / 1.5 - 1.0).abs() < 0.02);
    }

    fn quantile(sorted: &[f64], q: f64) -> f64 {
        sorted[((sorted.len() as f64 * q) as usize).min(sorted.len() - 1)]
    }

    #[test]
    fn cauchy_quartiles() {
        let mut s = NoiseSource::new(4);
        let mut d: Vec<f64> = (0..100_000).map(|_| s.cauchy(2.0).unwrap()).collect();
        d.sort_by(f64::total_cmp);
        assert!(quantile(&d, 0.5).abs() < 0.02);
        let half_iqr = (quantile(&d, 0.75) - quantile(&d, 0.25)) / 2.0;
        assert!((half_iqr - 1.0).abs() < 0.05, "half IQR {half_iqr}");
    }

    #[test]
    fn rejection_samplers_are_symmetric() {
        for gamma in [1.5, 4.0] {
            let mut s = NoiseSource::new(5);
            let n = 100_000;
            let pos = (0..n).filter(|_| s.cauchy(gamma).unwrap() > 0.0).count();
            assert!((pos as f64 / n as f64 - 0.5).abs() < 0.01, "gamma {gamma}: {pos}");
        }
        assert!(NoiseSource::new(0).cauchy(1.0).is_err());
    }

    #[test]
    fn rejection_sampler_matches_density() {
        // P(|Z| ≤ 1) under 1/(1+|z|^γ), by trapezoid integration.
        for gamma in [1.5, 3.0, 4.0] {
            let dens = |z: f64| 1.0 / (1.0 + z.abs().powf(gamma));
            let integrate = |a: f64, b: f64, steps: usize| {
                let h = (b - a) / steps as f64;
                (0..steps)
                    .map(|i| 0.5 * h * (dens(a + i as f64 * h) + dens(a + (i + 1) as f64 * h)))
                    .sum::<f64>()
            };
            // substitute z = 1/w on the tail so the integral is finite
            let tail = {
                let f = |w: f64| if w == 0.0 { 0.0 } else { dens(1.0 / w) / (w * w) };
                let steps = 200_000;
                let h = 1.0 / steps as f64;
                (0..steps)
                    .map(|i| 0.5 * h * (f(i as f64 * h) + f((i + 1) as f64 * h)))
                    .sum::<f64>()
            };
            let inner = integrate(0.0, 1.0, 200_000);
            let expected = inner / (inner + tail);
            let mut s = NoiseSource::new(6);
            let n = 100_000;
            let hits = (0..n).filter(|_| s.cauchy(gamma).unwrap().abs() <= 1.0).count();
            let got = hits as f64 / n as f64;
            assert!((got - expected).abs() < 0.01, "gamma {gamma}: {got} vs {expected}");
        }
    }
}
