//! Greedy rule-list learners, exact and differentially private.
//!
//! `max_length` is the length `K` of the list *including* the default rule,
//! so at most `K − 1` rules are selected.

mod dp;
mod greedy;
mod trace;

use std::fmt;
use std::str::FromStr;

use crate::bits::RowSet;
use crate::dataset::{Antecedent, BinaryDataset, MinedRuleSet};
use crate::error::{Error, Result};
use crate::gini::GiniStats;
use crate::mechanisms::{MechanismKind, NoiseSource};

pub use dp::dp_greedy_rl;
pub use greedy::{greedy_rl, greedy_rl_with_stop};
pub use trace::{audit, Access, AccessKind, AuditReport, NodeRecord, Scope, StopReason, TrainTrace};

/// Knobs shared by every learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerConfig {
    pub max_length: usize,
    /// Minimum support `λ` as a fraction of the training set.
    pub min_support: f64,
    /// Confidence `C` of the noisy support check.
    pub confidence: f64,
    /// Tail exponent of the smooth Cauchy mechanism.
    pub gamma: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            max_length: 5,
            min_support: 0.05,
            confidence: 0.99,
            gamma: 2.0,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_length < 1 {
            return Err(Error::param("max length must be at least 1"));
        }
        if !(self.min_support > 0.0 && self.min_support < 1.0) {
            return Err(Error::param(format!("min support {} outside (0, 1)", self.min_support)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::param(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::param(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        Ok(())
    }

    /// `Λ = ⌊n·λ⌋`, required to be at least 1.
    pub fn lambda_abs(&self, n: usize) -> Result<usize> {
        let lam = (n as f64 * self.min_support).floor() as usize;
        if lam < 1 {
            return Err(Error::param(format!(
                "min support {} of {n} samples is below one sample",
                self.min_support
            )));
        }
        Ok(lam)
    }
}

/// A learner: the exact baseline or a private variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    NonPrivate,
    Private(MechanismKind),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::NonPrivate => "none",
            Method::Private(m) => m.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            Ok(Method::NonPrivate)
        } else {
            s.parse().map(Method::Private)
        }
    }
}

/// `T = ⌊−(ln 2 + ln(1 − C)) / ε_node⌋ + 1`.
pub fn confidence_threshold(confidence: f64, epsilon_node: f64) -> Result<u64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::param(format!("confidence {confidence} outside (0, 1)")));
    }
    if epsilon_node.is_nan() || epsilon_node <= 0.0 {
        return Err(Error::param("epsilon_node must be positive"));
    }
    let t = -(2f64.ln() + (1.0 - confidence).ln()) / epsilon_node;
    Ok(t.max(0.0).floor() as u64 + 1)
}

/// Prediction from Laplace-noised label counts; ties predict 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisyPrediction {
    pub prediction: bool,
    pub c0: f64,
    pub c1: f64,
}

/// Noises the label counts `(n0, n1)` of the rows `antecedent` captures in
/// `remaining`, at sensitivity 1 each.
pub fn pred_dp(
    antecedent: &Antecedent,
    data: &BinaryDataset,
    remaining: &RowSet,
    epsilon_node: f64,
    source: &mut NoiseSource,
) -> NoisyPrediction {
    let captured = crate::rulelist::capture(antecedent, data, remaining);
    noisy_prediction(captured.label_counts, epsilon_node, source)
}

pub(crate) fn noisy_prediction(counts: (usize, usize), epsilon_node: f64, source: &mut NoiseSource) -> NoisyPrediction {
    let scale = 1.0 / epsilon_node;
    let c0 = counts.0 as f64 + source.laplace(scale);
    let c1 = counts.1 as f64 + source.laplace(scale);
    NoisyPrediction {
        prediction: c0 <= c1,
        c0,
        c1,
    }
}

/// Exact majority label, ties predicting 1.
pub(crate) fn majority(counts: (usize, usize)) -> bool {
    counts.1 >= counts.0
}

/// Rows of each mined antecedent, computed once per training run.
pub(crate) struct Candidates {
    pub(crate) rows: Vec<RowSet>,
}

impl Candidates {
    pub(crate) fn new(data: &BinaryDataset, rules: &MinedRuleSet) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::NoRules);
        }
        for a in &rules.antecedents {
            if let Some(f) = a.max_feature() {
                if f >= data.n_features() {
                    return Err(Error::InvalidRuleList(format!(
                        "rule refers to feature {f} but the dataset has {}",
                        data.n_features()
                    )));
                }
            }
        }
        Ok(Candidates {
            rows: rules.antecedents.iter().map(|a| a.rows(data)).collect(),
        })
    }

    /// Split statistics of candidate `i` over `remaining`.
    pub(crate) fn stats(
        &self,
        i: usize,
        data: &BinaryDataset,
        remaining: &RowSet,
        n_rem: usize,
        pos_rem: usize,
    ) -> GiniStats {
        let rows = &self.rows[i];
        let n_c = rows.intersection_count(remaining);
        let pos_c = rows.intersection_count3(remaining, data.labels());
        GiniStats {
            n_captured: n_c,
            n_left: n_rem - n_c,
            captured_positive: pos_c,
            left_positive: pos_rem - pos_c,
        }
    }
}
