//! Gini impurity of a rule split and its local and smooth sensitivity.
//!
//! The smooth sensitivity only depends on the number `n` of samples still
//! to classify, the absolute minimum support `Λ` and the smoothness `β`:
//!
//! ```text
//! g(x)  = 1 − (x/(x+1))² − (1/(x+1))²
//! ξ(k)  = e^{−kβ} · g(max(Λ, n − k))
//! S*    = max_{k ≥ 0} ξ(k)
//! ```
//!
//! [`smooth_sensitivity`] evaluates `ξ` at four candidate points only;
//! [`smooth_sensitivity_oracle`] scans every `k` and exists to check it.

use crate::error::{Error, Result};

/// Label counts on both sides of a candidate split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GiniStats {
    pub n_captured: usize,
    pub n_left: usize,
    pub captured_positive: usize,
    pub left_positive: usize,
}

impl GiniStats {
    pub fn new(n_captured: usize, captured_positive: usize, n_left: usize, left_positive: usize) -> Result<Self> {
        if captured_positive > n_captured || left_positive > n_left {
            return Err(Error::param("positive count exceeds side size"));
        }
        Ok(GiniStats {
            n_captured,
            n_left,
            captured_positive,
            left_positive,
        })
    }

    /// The unsplit set: everything on the uncaptured side.
    pub fn unsplit(n: usize, positive: usize) -> Result<Self> {
        GiniStats::new(0, 0, n, positive)
    }

    pub fn total(&self) -> usize {
        self.n_captured + self.n_left
    }
}

fn side_term(n_side: f64, positive: f64, total: f64) -> f64 {
    if n_side <= 0.0 {
        return 0.0;
    }
    let p = positive / n_side;
    (n_side / total) * (1.0 - p * p - (1.0 - p) * (1.0 - p))
}

/// Weighted impurity `G_c + G_l` of the split; an empty side contributes 0.
pub fn gini_reduction(stats: GiniStats) -> Result<f64> {
    let total = stats.total();
    if total == 0 {
        return Err(Error::EmptySplit);
    }
    let total = total as f64;
    Ok(
        side_term(stats.n_captured as f64, stats.captured_positive as f64, total)
            + side_term(stats.n_left as f64, stats.left_positive as f64, total),
    )
}

/// Impurity from real-valued `(negative, positive)` counts per side, as
/// produced by noisy counting. Negative counts are clamped to 0; `None` when
/// nothing is left after clamping.
pub fn gini_from_real_counts(captured: (f64, f64), left: (f64, f64)) -> Option<f64> {
    let c = (captured.0.max(0.0), captured.1.max(0.0));
    let l = (left.0.max(0.0), left.1.max(0.0));
    let total = c.0 + c.1 + l.0 + l.1;
    if total <= 0.0 {
        return None;
    }
    Some(side_term(c.0 + c.1, c.1, total) + side_term(l.0 + l.1, l.1, total))
}

/// `g(x) = 1 − (x/(x+1))² − (1/(x+1))²`, the largest change of the impurity
/// when one sample is added to or removed from a set of `x` samples.
pub fn g(x: f64) -> f64 {
    let a = x / (x + 1.0);
    let b = 1.0 / (x + 1.0);
    1.0 - a * a - b * b
}

/// Local sensitivity of the Gini impurity at `n_remaining` samples.
pub fn local_sensitivity(n_remaining: usize) -> f64 {
    g(n_remaining as f64)
}

/// The two values of `β` where the discriminant `(1−β)² − 4β` vanishes.
pub const EXCLUDED_BETAS: [f64; 2] = [0.171_572_875_253_809_9, 5.828_427_124_746_19];

fn discriminant(beta: f64) -> f64 {
    (1.0 - beta) * (1.0 - beta) - 4.0 * beta
}

/// Rejects non-positive, non-finite and excluded smoothness parameters.
pub fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::param(format!("beta must be positive and finite, got {beta}")));
    }
    if discriminant(beta).abs() <= 1e-12 {
        return Err(Error::param(format!(
            "beta {beta} is one of the excluded values 3 ± 2√2"
        )));
    }
    Ok(())
}

/// Inputs of the smooth sensitivity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivityContext {
    n_remaining: usize,
    lambda_abs: usize,
    beta: f64,
}

impl SensitivityContext {
    pub fn new(n_remaining: usize, lambda_abs: usize, beta: f64) -> Result<Self> {
        if lambda_abs < 1 {
            return Err(Error::param("absolute minimum support must be at least 1"));
        }
        if n_remaining < lambda_abs {
            return Err(Error::param(format!(
                "{n_remaining} remaining samples is below the minimum support {lambda_abs}"
            )));
        }
        check_beta(beta)?;
        Ok(SensitivityContext {
            n_remaining,
            lambda_abs,
            beta,
        })
    }

    pub fn n_remaining(&self) -> usize {
        self.n_remaining
    }

    pub fn lambda_abs(&self) -> usize {
        self.lambda_abs
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same `Λ` and `β` at a different remaining count.
    pub fn with_n(&self, n_remaining: usize) -> Result<Self> {
        SensitivityContext::new(n_remaining, self.lambda_abs, self.beta)
    }

    fn xi(&self, k: usize) -> f64 {
        let x = self.n_remaining.saturating_sub(k).max(self.lambda_abs);
        (-(k as f64) * self.beta).exp() * g(x as f64)
    }
}

/// Closed-form smooth sensitivity.
///
/// As a function of `x = n − k`, `ln ξ` has derivative
/// `(βx² + (β−1)x + 1) / (x(x+1))`. When the discriminant is positive its
/// smaller root `y2` is the only interior local maximum, so the integer
/// maximum lies at `k = 0`, `k = n − Λ` or next to `t = n − y2`.
pub fn smooth_sensitivity(ctx: &SensitivityContext) -> f64 {
    let k_max = ctx.n_remaining - ctx.lambda_abs;
    let mut best = ctx.xi(0).max(ctx.xi(k_max));
    let disc = discriminant(ctx.beta);
    if disc > 0.0 {
        let y2 = (1.0 - ctx.beta - disc.sqrt()) / (2.0 * ctx.beta);
        let t = (ctx.n_remaining as f64 - y2).clamp(0.0, k_max as f64);
        for k in [t.floor() as usize, t.ceil() as usize] {
            best = best.max(ctx.xi(k.min(k_max)));
        }
    }
    best
}

/// Exhaustive maximum of `e^{−βk}·g(max(Λ, n−k))` over `k ∈ [0, n−Λ]`.
///
/// Beyond `n − Λ` the `g` factor is constant and the exponential keeps
/// shrinking, so the finite range is exact.
pub fn smooth_sensitivity_oracle(ctx: &SensitivityContext) -> f64 {
    // written independently of `g`/`xi` above
    let ls = |x: f64| 2.0 * x / ((x + 1.0) * (x + 1.0));
    let n = ctx.n_remaining;
    let lam = ctx.lambda_abs;
    (0..=n - lam)
        .map(|k| (-ctx.beta * k as f64).exp() * ls((n - k).max(lam) as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimum supports of the reference grid.
pub const GRID_LAMBDAS: [usize; 3] = [1, 5, 50];
/// Smoothness parameters of the reference grid, including two near `3 − 2√2`
/// and `3 + 2√2`.
pub const GRID_BETAS: [f64; 8] = [1e-4, 1e-3, 1e-2, 0.1, 0.17, 1.0, 5.0, 6.0];
/// Largest remaining count of the reference grid.
pub const GRID_MAX_N: usize = 2000;

/// Every `(n, Λ, β)` with `Λ ≤ n ≤ GRID_MAX_N` over the grid constants.
pub fn sensitivity_grid() -> impl Iterator<Item = SensitivityContext> {
    GRID_LAMBDAS.into_iter().flat_map(|lambda_abs| {
        GRID_BETAS.into_iter().flat_map(move |beta| {
            (lambda_abs..=GRID_MAX_N).map(move |n_remaining| SensitivityContext {
                n_remaining,
                lambda_abs,
                beta,
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini_reduction(GiniStats::new(2, 2, 2, 0).unwrap()).unwrap(), 0.0);
        assert_eq!(gini_reduction(GiniStats::new(2, 1, 2, 1).unwrap()).unwrap(), 0.5);
        let third = gini_reduction(GiniStats::new(3, 2, 1, 0).unwrap()).unwrap();
        assert!(close(third, 1.0 / 3.0));
        assert!(matches!(
            gini_reduction(GiniStats::new(0, 0, 0, 0).unwrap()),
            Err(Error::EmptySplit)
        ));
        assert!(GiniStats::new(1, 2, 0, 0).is_err());
    }

    #[test]
    fn real_count_gini_matches_integer_version() {
        let exact = gini_reduction(GiniStats::new(3, 2, 5, 1).unwrap()).unwrap();
        let real = gini_from_real_counts((1.0, 2.0), (4.0, 1.0)).unwrap();
        assert!(close(exact, real));
        assert_eq!(gini_from_real_counts((-1.0, -2.0), (0.0, -0.5)), None);
    }

    #[test]
    fn local_sensitivity_examples() {
        assert_eq!(local_sensitivity(1), 0.5);
        assert!(close(local_sensitivity(3), 0.375));
        assert!(local_sensitivity(1_000_000) < 1e-5);
    }

    #[test]
    fn g_rises_then_falls() {
        let xs: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.005).collect();
        for w in xs.windows(2) {
            if w[1] <= 1.0 {
                assert!(g(w[1]) > g(w[0]), "g not increasing at {}", w[0]);
            } else if w[0] >= 1.0 {
                assert!(g(w[1]) < g(w[0]), "g not decreasing at {}", w[0]);
            }
        }
        assert_eq!(g(1.0), 0.5);
    }

    #[test]
    fn excluded_betas_are_rejected() {
        for b in EXCLUDED_BETAS {
            assert!(check_beta(b).is_err());
            assert!(SensitivityContext::new(10, 1, b).is_err());
        }
        let exact = [3.0 - 2.0 * 2f64.sqrt(), 3.0 + 2.0 * 2f64.sqrt()];
        assert!(exact.iter().all(|&b| check_beta(b).is_err()));
        assert!(check_beta(0.0).is_err());
        assert!(check_beta(f64::NAN).is_err());
        assert!(SensitivityContext::new(4, 5, 0.1).is_err());
        assert!(SensitivityContext::new(4, 0, 0.1).is_err());
    }

    #[test]
    fn beta_in_gap_gives_local_sensitivity() {
        for n in [1, 2, 10, 500] {
            let ctx = SensitivityContext::new(n, 1, 1.0).unwrap();
            assert_eq!(smooth_sensitivity(&ctx), local_sensitivity(n));
        }
    }

    #[test]
    fn degenerate_interval() {
        let ctx = SensitivityContext::new(50, 50, 0.01).unwrap();
        assert_eq!(smooth_sensitivity(&ctx), g(50.0));
        assert!(close(smooth_sensitivity_oracle(&ctx), g(50.0)));
    }

    #[test]
    fn oracle_small_cases() {
        let ctx = SensitivityContext::new(30, 3, 10.0).unwrap();
        assert!(close(smooth_sensitivity_oracle(&ctx), g(30.0)));
        // n=20, Λ=5, β=0.05: enumerate the 16 values by hand
        let ctx = SensitivityContext::new(20, 5, 0.05).unwrap();
        let manual = (0..=15)
            .map(|k| {
                let x = (20 - k).max(5) as f64;
                (-0.05 * k as f64).exp() * (1.0 - (x / (x + 1.0)).powi(2) - (1.0 / (x + 1.0)).powi(2))
            })
            .fold(0.0, f64::max);
        assert!(close(smooth_sensitivity_oracle(&ctx), manual));
        assert!(close(smooth_sensitivity(&ctx), manual));
    }

    #[test]
    fn closed_form_matches_oracle_spot_check() {
        let ctx = SensitivityContext::new(1000, 50, 0.01).unwrap();
        let s = smooth_sensitivity(&ctx);
        assert!(close(s, smooth_sensitivity_oracle(&ctx)));
        assert!(s >= local_sensitivity(1000));
        assert!(s <= 0.5);
    }
}
