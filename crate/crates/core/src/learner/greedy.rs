use crate::dataset::{BinaryDataset, MinedRuleSet};
use crate::error::Result;
use crate::gini::{gini_reduction, GiniStats};
use crate::rulelist::{capture, Rule, RuleList};

use super::{majority, Candidates, LearnerConfig, StopReason};

/// Non-private greedy learner over exact Gini values.
///
/// Each round picks the remaining candidate with the lowest impurity,
/// provided it is strictly below the impurity of the unsplit remainder.
/// Stops at `K − 1` rules, when fewer than `Λ` samples remain, or when no
/// candidate improves.
pub fn greedy_rl(train: &BinaryDataset, rules: &MinedRuleSet, config: &LearnerConfig) -> Result<RuleList> {
    greedy_rl_with_stop(train, rules, config).map(|(list, _)| list)
}

/// [`greedy_rl`] plus the reason the loop ended.
pub fn greedy_rl_with_stop(
    train: &BinaryDataset,
    rules: &MinedRuleSet,
    config: &LearnerConfig,
) -> Result<(RuleList, StopReason)> {
    config.validate()?;
    let candidates = Candidates::new(train, rules)?;
    let lambda_abs = config.lambda_abs(train.n_samples())?;
    let mut available: Vec<usize> = (0..rules.len()).collect();
    let mut remaining = train.all_rows();
    let mut list = Vec::new();
    let mut stop = StopReason::MaxLength;

    while list.len() + 1 < config.max_length {
        let n_rem = remaining.count();
        if n_rem < lambda_abs {
            stop = StopReason::Support;
            break;
        }
        let pos_rem = remaining.intersection_count(train.labels());
        let mut best_gini = gini_reduction(GiniStats::unsplit(n_rem, pos_rem)?)?;
        let mut best = None;
        for (slot, &i) in available.iter().enumerate() {
            let g = gini_reduction(candidates.stats(i, train, &remaining, n_rem, pos_rem))?;
            if g < best_gini {
                best_gini = g;
                best = Some(slot);
            }
        }
        let Some(slot) = best else {
            stop = StopReason::NoImprovement;
            break;
        };
        let i = available.remove(slot);
        let antecedent = &rules.antecedents[i];
        let c = capture(antecedent, train, &remaining);
        list.push(Rule::new(antecedent.clone(), majority(c.label_counts)));
        remaining = c.remaining;
    }

    let n_rem = remaining.count();
    let pos_rem = remaining.intersection_count(train.labels());
    list.push(Rule::default_rule(majority((n_rem - pos_rem, pos_rem))));
    Ok((RuleList::new(list)?, stop))
}
