use crate::error::{Error, Result};
use crate::gini::check_beta;

/// Total `(ε, δ)` budget and its per-node share.
///
/// `max_length` is the rule-list length `K` counting the default rule, so a
/// model holds at most `K − 1` selected rules, each of which consumes one
/// smooth-sensitivity release and thus one `δ_node`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    epsilon_total: f64,
    delta_total: f64,
    max_length: usize,
    release_counts: bool,
    epsilon_node: f64,
    delta_node: f64,
    beta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64, max_length: usize, release_counts: bool) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
        }
        if max_length < 2 {
            return Err(Error::param(format!("max length must be at least 2, got {max_length}")));
        }
        let k = max_length as f64;
        let denominator = if release_counts { 3.0 * k - 1.0 } else { 2.0 * k - 1.0 };
        let epsilon_node = epsilon / denominator;
        let delta_node = delta / (k - 1.0);
        let beta = epsilon_node / (2.0 * (2.0 / delta_node).ln());
        check_beta(beta)?;
        Ok(PrivacyBudget {
            epsilon_total: epsilon,
            delta_total: delta,
            max_length,
            release_counts,
            epsilon_node,
            delta_node,
            beta,
        })
    }

    pub fn epsilon_total(&self) -> f64 {
        self.epsilon_total
    }

    pub fn delta_total(&self) -> f64 {
        self.delta_total
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn release_counts(&self) -> bool {
        self.release_counts
    }

    pub fn epsilon_node(&self) -> f64 {
        self.epsilon_node
    }

    pub fn delta_node(&self) -> f64 {
        self.delta_node
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of `ε_node` units any single record may be charged.
    pub fn epsilon_units(&self) -> usize {
        let k = self.max_length;
        if self.release_counts {
            3 * k - 1
        } else {
            2 * k - 1
        }
    }
}
