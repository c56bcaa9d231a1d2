use crate::error::{Error, Result};

use super::NoiseSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Max,
    Min,
}

/// Samples index `i` with probability `∝ exp(ε·u_i / (2Δu))`.
///
/// Weights are shifted by the largest utility before exponentiation. A
/// silent source returns the first maximizer.
pub fn exponential_mechanism(utilities: &[f64], delta_u: f64, epsilon: f64, source: &mut NoiseSource) -> Result<usize> {
    if utilities.is_empty() {
        return Err(Error::param("exponential mechanism needs at least one candidate"));
    }
    if !(delta_u > 0.0 && epsilon > 0.0) {
        return Err(Error::param(
            "exponential mechanism needs positive sensitivity and epsilon",
        ));
    }
    let top = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if source.is_silent() {
        return Ok(utilities.iter().position(|&u| u == top).unwrap_or(0));
    }
    let weights: Vec<f64> = utilities
        .iter()
        .map(|&u| (epsilon * (u - top) / (2.0 * delta_u)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut target = source.uniform_open() * total;
    for (i, w) in weights.iter().enumerate() {
        if target < *w {
            return Ok(i);
        }
        target -= w;
    }
    Ok(weights.iter().rposition(|&w| w > 0.0).unwrap_or(0))
}

/// The analytic distribution sampled by [`exponential_mechanism`].
pub fn exponential_weights(utilities: &[f64], delta_u: f64, epsilon: f64) -> Vec<f64> {
    let top = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = utilities
        .iter()
        .map(|&u| (epsilon * (u - top) / (2.0 * delta_u)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Adds one `noise()` draw to each value in order and returns the index of
/// the extremal noisy value. Ties go to the earlier index.
pub fn noisy_max_report(values: &[f64], mut noise: impl FnMut() -> f64, direction: Direction) -> Result<(usize, f64)> {
    if values.is_empty() {
        return Err(Error::param("noisy max report needs at least one value"));
    }
    let mut best = (0, values[0] + noise());
    for (i, v) in values.iter().enumerate().skip(1) {
        let noisy = v + noise();
        let better = match direction {
            Direction::Max => noisy > best.1,
            Direction::Min => noisy < best.1,
        };
        if better {
            best = (i, noisy);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_two_options_odds() {
        let mut s = NoiseSource::new(9);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| exponential_mechanism(&[0.0, 1.0], 0.5, 1.0, &mut s).unwrap() == 1)
            .count();
        let p = std::f64::consts::E / (1.0 + std::f64::consts::E);
        assert!((exponential_weights(&[0.0, 1.0], 0.5, 1.0)[1] - p).abs() < 1e-12);
        assert!((ones as f64 / n as f64 - p).abs() < 0.01);
    }

    #[test]
    fn exponential_uniform_and_limit() {
        let mut s = NoiseSource::new(10);
        let n = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            counts[exponential_mechanism(&[0.3; 5], 0.5, 1.0, &mut s).unwrap()] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 / n as f64 - 0.2).abs() < 0.01));
        let hits = (0..10_000)
            .filter(|_| exponential_mechanism(&[0.0, 0.5, 0.2], 0.5, 1e3, &mut s).unwrap() == 1)
            .count();
        assert!(hits as f64 / 10_000.0 > 0.999);
        assert_eq!(
            exponential_mechanism(&[0.0, 1.0, 1.0], 0.5, 1.0, &mut NoiseSource::silent()).unwrap(),
            1
        );
        assert!(exponential_mechanism(&[], 0.5, 1.0, &mut s).is_err());
    }

    #[test]
    fn exponential_survives_huge_utilities() {
        let mut s = NoiseSource::new(11);
        let i = exponential_mechanism(&[1e6, 1e6 + 1.0], 0.5, 1e3, &mut s).unwrap();
        assert_eq!(i, 1);
    }

    #[test]
    fn noisy_max_without_noise_is_argmax() {
        let v = [0.3, 0.1, 0.4, 0.1];
        assert_eq!(noisy_max_report(&v, || 0.0, Direction::Min).unwrap().0, 1);
        assert_eq!(noisy_max_report(&v, || 0.0, Direction::Max).unwrap().0, 2);
    }

    #[test]
    fn noisy_max_symmetric_tie() {
        let mut s = NoiseSource::new(12);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| {
                noisy_max_report(&[0.2, 0.2], || s.laplace(1.0), Direction::Min)
                    .unwrap()
                    .0
                    == 0
            })
            .count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn noisy_min_clear_gap() {
        let mut s = NoiseSource::new(13);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| {
                noisy_max_report(&[0.1, 0.4], || s.laplace(0.01), Direction::Min)
                    .unwrap()
                    .0
                    == 0
            })
            .count();
        assert!(zeros as f64 / n as f64 > 0.999);
    }
}
