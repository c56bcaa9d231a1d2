use crate::bits::RowSet;
use crate::dataset::{BinaryDataset, MinedRuleSet};
use crate::error::{Error, Result};
use crate::gini::{gini_from_real_counts, gini_reduction, smooth_sensitivity, GiniStats, SensitivityContext};
use crate::mechanisms::{
    cauchy_beta_limit, exponential_mechanism, gaussian_sigma, noisy_max_report, Direction, MechanismKind, NoiseSource,
    PrivacyBudget, GINI_GLOBAL_SENSITIVITY,
};
use crate::rulelist::{capture, Rule, RuleList};

use super::trace::{AccessKind, NodeRecord, Scope, StopReason, TrainTrace};
use super::{confidence_threshold, noisy_prediction, Candidates, LearnerConfig};

/// Private greedy rule-list learner.
///
/// Every node spends at most three budgeted queries:
/// 1. a Laplace-noised count of the remaining rows, compared to `Λ + T`;
/// 2. one private selection among "no rule" and every unused candidate;
/// 3. Laplace-noised label counts of the rows the winner captures.
///
/// The default rule gets its prediction from noised label counts of the
/// final remainder. `T` is the confidence threshold for the smooth variants
/// and 0 for the others.
pub fn dp_greedy_rl(
    train: &BinaryDataset,
    rules: &MinedRuleSet,
    config: &LearnerConfig,
    mechanism: MechanismKind,
    budget: &PrivacyBudget,
    source: &mut NoiseSource,
) -> Result<(RuleList, TrainTrace)> {
    config.validate()?;
    if budget.max_length() != config.max_length {
        return Err(Error::param(format!(
            "budget was split for max length {} but the learner uses {}",
            budget.max_length(),
            config.max_length
        )));
    }
    if train.n_samples() == 0 {
        return Err(Error::EmptyDataset);
    }
    let candidates = Candidates::new(train, rules)?;
    let lambda_abs = config.lambda_abs(train.n_samples())?;
    let eps = budget.epsilon_node();
    if mechanism == MechanismKind::SmoothCauchy && budget.beta() > cauchy_beta_limit(eps, config.gamma) {
        return Err(Error::param(format!(
            "beta {} exceeds the smooth Cauchy limit {} at gamma {}",
            budget.beta(),
            cauchy_beta_limit(eps, config.gamma),
            config.gamma
        )));
    }
    let threshold = if mechanism.is_smooth() {
        confidence_threshold(config.confidence, eps)?
    } else {
        0
    };

    let mut selector = Selector {
        mechanism,
        budget,
        gamma: config.gamma,
        lambda_abs,
        total_rules: rules.len(),
    };
    let mut trace = TrainTrace::start(mechanism.name(), budget, lambda_abs, threshold);
    let mut available: Vec<usize> = (0..rules.len()).collect();
    let mut remaining = train.all_rows();
    let mut list = Vec::new();
    let mut stop = StopReason::MaxLength;

    while list.len() + 1 < config.max_length {
        let node = list.len() + 1;
        let here = Scope::Remainder { after: list.len() };
        let n_rem = remaining.count();
        let pos_rem = remaining.intersection_count(train.labels());

        let noisy_support = n_rem as f64 + source.laplace(1.0 / eps);
        trace.charge(node, AccessKind::SupportCheck, here, eps, 0.0);
        let mut record = NodeRecord {
            node,
            n_remaining: n_rem,
            noisy_support,
            chosen: None,
            score: None,
            noise_scale: None,
        };
        if noisy_support < (lambda_abs as u64 + threshold) as f64 {
            trace.nodes.push(record);
            stop = StopReason::Support;
            break;
        }

        let outcome = selector.select(&candidates, &available, train, &remaining, n_rem, pos_rem, source)?;
        trace.charge(node, AccessKind::Selection, here, outcome.epsilon, outcome.delta);
        record.noise_scale = outcome.noise_scale;
        let Some((slot, score)) = outcome.winner else {
            trace.nodes.push(record);
            stop = StopReason::NoImprovement;
            break;
        };
        let i = available.remove(slot);
        record.chosen = Some(i);
        record.score = Some(score);
        trace.nodes.push(record);

        let antecedent = &rules.antecedents[i];
        let c = capture(antecedent, train, &remaining);
        let pred = noisy_prediction(c.label_counts, eps, source);
        trace.charge(node, AccessKind::Prediction, Scope::Captured { rule: node }, eps, 0.0);
        let mut rule = Rule::new(antecedent.clone(), pred.prediction);
        if budget.release_counts() {
            rule = rule.with_counts(pred.c0, pred.c1);
        }
        list.push(rule);
        remaining = c.remaining;
    }

    let node = list.len() + 1;
    let n_rem = remaining.count();
    let pos_rem = remaining.intersection_count(train.labels());
    let pred = noisy_prediction((n_rem - pos_rem, pos_rem), eps, source);
    trace.charge(
        node,
        AccessKind::Prediction,
        Scope::Remainder { after: list.len() },
        eps,
        0.0,
    );
    let mut default = Rule::default_rule(pred.prediction);
    if budget.release_counts() {
        default = default.with_counts(pred.c0, pred.c1);
    }
    list.push(default);
    trace.stop_reason = stop;
    Ok((RuleList::new(list)?, trace))
}

struct Selection {
    /// Slot in the available list and the winner's score; `None` when
    /// "no rule" wins.
    winner: Option<(usize, f64)>,
    noise_scale: Option<f64>,
    epsilon: f64,
    delta: f64,
}

struct Selector<'b> {
    mechanism: MechanismKind,
    budget: &'b PrivacyBudget,
    gamma: f64,
    lambda_abs: usize,
    total_rules: usize,
}

impl Selector<'_> {
    #[allow(clippy::too_many_arguments)]
    fn select(
        &mut self,
        candidates: &Candidates,
        available: &[usize],
        data: &BinaryDataset,
        remaining: &RowSet,
        n_rem: usize,
        pos_rem: usize,
        source: &mut NoiseSource,
    ) -> Result<Selection> {
        let eps = self.budget.epsilon_node();
        let delta_node = self.budget.delta_node();
        if self.mechanism == MechanismKind::NoisyCounts {
            return self.select_noisy_counts(candidates, available, data, remaining, n_rem, pos_rem, source);
        }

        // exact impurities: "no rule" first, then candidates in mined order
        let mut values = Vec::with_capacity(available.len() + 1);
        values.push(exact_gini(GiniStats::unsplit(n_rem, pos_rem)?)?);
        for &i in available {
            values.push(exact_gini(candidates.stats(i, data, remaining, n_rem, pos_rem))?);
        }

        let (winner, scale, delta) = match self.mechanism {
            MechanismKind::Exponential => {
                let utilities: Vec<f64> = values.iter().map(|g| -g).collect();
                let w = exponential_mechanism(&utilities, GINI_GLOBAL_SENSITIVITY, eps, source)?;
                ((w, values[w]), None, 0.0)
            }
            MechanismKind::SmoothLaplace => {
                let scale = 2.0 * self.s_star(n_rem)? / eps;
                let w = noisy_max_report(&values, || scale * source.standard_laplace(), Direction::Min)?;
                (w, Some(scale), delta_node)
            }
            MechanismKind::SmoothCauchy => {
                let scale = 2.0 * (self.gamma + 1.0) * self.s_star(n_rem)? / eps;
                let noise = (0..values.len())
                    .map(|_| source.cauchy(self.gamma))
                    .collect::<Result<Vec<_>>>()?;
                let mut draws = noise.into_iter();
                let w = noisy_max_report(&values, || scale * draws.next().unwrap_or(0.0), Direction::Min)?;
                (w, Some(scale), 0.0)
            }
            MechanismKind::GlobalLaplace => {
                let scale = GINI_GLOBAL_SENSITIVITY / eps;
                let w = noisy_max_report(&values, || source.laplace(scale), Direction::Min)?;
                (w, Some(scale), 0.0)
            }
            MechanismKind::GlobalGaussian => {
                let sigma = gaussian_sigma(GINI_GLOBAL_SENSITIVITY, eps, delta_node);
                let w = noisy_max_report(&values, || source.gaussian(sigma), Direction::Min)?;
                (w, Some(sigma), delta_node)
            }
            MechanismKind::NoisyCounts => unreachable!("handled above"),
        };
        Ok(Selection {
            winner: (winner.0 > 0).then(|| (winner.0 - 1, winner.1)),
            noise_scale: scale,
            epsilon: eps,
            delta,
        })
    }

    /// Smooth sensitivity at the current remaining count (at least `Λ`).
    fn s_star(&self, n_rem: usize) -> Result<f64> {
        let ctx = SensitivityContext::new(n_rem.max(self.lambda_abs), self.lambda_abs, self.budget.beta())?;
        Ok(smooth_sensitivity(&ctx))
    }

    /// Gini computed from Laplace-noised label counts, each count at
    /// `ε_node / (2|R|)`. The remainder's counts are noised once per node;
    /// uncaptured counts are derived by subtraction.
    #[allow(clippy::too_many_arguments)]
    fn select_noisy_counts(
        &mut self,
        candidates: &Candidates,
        available: &[usize],
        data: &BinaryDataset,
        remaining: &RowSet,
        n_rem: usize,
        pos_rem: usize,
        source: &mut NoiseSource,
    ) -> Result<Selection> {
        let eps = self.budget.epsilon_node();
        let eps_count = eps / (2.0 * self.total_rules as f64);
        let scale = 1.0 / eps_count;
        let rem = (
            (n_rem - pos_rem) as f64 + source.laplace(scale),
            pos_rem as f64 + source.laplace(scale),
        );
        let impurity = |captured: (f64, f64)| {
            let left = (rem.0 - captured.0, rem.1 - captured.1);
            gini_from_real_counts(captured, left).unwrap_or(GINI_GLOBAL_SENSITIVITY)
        };
        let mut best_score = impurity((0.0, 0.0));
        let mut winner = None;
        for (slot, &i) in available.iter().enumerate() {
            let s = candidates.stats(i, data, remaining, n_rem, pos_rem);
            let c = (
                (s.n_captured - s.captured_positive) as f64 + source.laplace(scale),
                s.captured_positive as f64 + source.laplace(scale),
            );
            let g = impurity(c);
            if g < best_score {
                best_score = g;
                winner = Some((slot, g));
            }
        }
        Ok(Selection {
            winner,
            noise_scale: Some(scale),
            epsilon: eps_count * (available.len() + 1) as f64,
            delta: 0.0,
        })
    }
}

fn exact_gini(stats: GiniStats) -> Result<f64> {
    if stats.total() == 0 {
        return Ok(0.0);
    }
    gini_reduction(stats)
}
