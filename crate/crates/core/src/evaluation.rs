//! Test accuracy and the train/test capture-distribution gap of a model.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::BinaryDataset;
use crate::error::Result;
use crate::rulelist::RuleList;

/// Per-label total-variation gap between the rule-capture distributions on
/// the training and test sets, and its prior-weighted summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VulnerabilityReport {
    pub tau_per_label: BTreeMap<String, f64>,
    pub label_priors: BTreeMap<String, f64>,
    /// `½ + ½ Σ_y P[y]·τ(y)`, in `[0.5, 1]`.
    pub overall: f64,
    /// Labels missing from one of the sets; their `τ` is reported as 0.
    pub undefined_labels: Vec<String>,
}

/// Capture fractions `P[rule | label]` for each label, under first-match.
fn capture_distribution(model: &RuleList, data: &BinaryDataset) -> [Option<Vec<f64>>; 2] {
    let parts = model.partition(data);
    let n_pos = data.positive_count();
    let n_neg = data.n_samples() - n_pos;
    let dist = |label_total: usize, hits: &dyn Fn(&crate::bits::RowSet) -> usize| {
        (label_total > 0).then(|| parts.iter().map(|p| hits(p) as f64 / label_total as f64).collect())
    };
    [
        dist(n_neg, &|p| p.count() - p.intersection_count(data.labels())),
        dist(n_pos, &|p| p.intersection_count(data.labels())),
    ]
}

pub fn vulnerability(model: &RuleList, train: &BinaryDataset, test: &BinaryDataset) -> Result<VulnerabilityReport> {
    if train.n_samples() == 0 || test.n_samples() == 0 {
        return Err(crate::error::Error::EmptyDataset);
    }
    let p_train = capture_distribution(model, train);
    let p_test = capture_distribution(model, test);
    let pooled_pos = (train.positive_count() + test.positive_count()) as f64;
    let pooled = (train.n_samples() + test.n_samples()) as f64;
    let priors = [1.0 - pooled_pos / pooled, pooled_pos / pooled];

    let mut tau_per_label = BTreeMap::new();
    let mut label_priors = BTreeMap::new();
    let mut undefined_labels = Vec::new();
    let mut overall = 0.5;
    for y in 0..2 {
        let key = y.to_string();
        let tau = match (&p_train[y], &p_test[y]) {
            (Some(a), Some(b)) => 0.5 * a.iter().zip(b).map(|(x, z)| (x - z).abs()).sum::<f64>(),
            _ => {
                undefined_labels.push(key.clone());
                0.0
            }
        };
        overall += 0.5 * priors[y] * tau;
        tau_per_label.insert(key.clone(), tau);
        label_priors.insert(key, priors[y]);
    }
    Ok(VulnerabilityReport {
        tau_per_label,
        label_priors,
        overall,
        undefined_labels,
    })
}

pub fn accuracy_report(model: &RuleList, test: &BinaryDataset) -> Result<f64> {
    model.accuracy(test)
}

/// One JSON object per evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub train_accuracy: f64,
    pub vulnerability: VulnerabilityReport,
    pub rules: usize,
}

pub fn evaluate(model: &RuleList, train: &BinaryDataset, test: &BinaryDataset) -> Result<EvaluationReport> {
    Ok(EvaluationReport {
        accuracy: accuracy_report(model, test)?,
        train_accuracy: model.accuracy(train)?,
        vulnerability: vulnerability(model, train, test)?,
        rules: model.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Antecedent, Literal};
    use crate::rulelist::Rule;

    fn data(rows: &[(bool, bool)]) -> BinaryDataset {
        let feats: Vec<Vec<bool>> = rows.iter().map(|r| vec![r.0]).collect();
        let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
        BinaryDataset::from_rows(vec!["a".into()], &feats, &labels).unwrap()
    }

    fn one_rule() -> RuleList {
        RuleList::new(vec![
            Rule::new(Antecedent::new(vec![Literal::positive(0)]), true),
            Rule::default_rule(false),
        ])
        .unwrap()
    }

    #[test]
    fn identical_sets_are_not_vulnerable() {
        let d = data(&[(true, true), (false, true), (true, false), (false, false)]);
        let r = vulnerability(&one_rule(), &d, &d).unwrap();
        assert_eq!(r.overall, 0.5);
        assert!(r.undefined_labels.is_empty());
    }

    #[test]
    fn default_only_model_is_not_vulnerable() {
        let a = data(&[(true, true), (true, false), (true, true)]);
        let b = data(&[(false, true), (false, false)]);
        assert_eq!(vulnerability(&RuleList::constant(true), &a, &b).unwrap().overall, 0.5);
    }

    #[test]
    fn hand_computed_gap() {
        // train: positives all caught by rule 1; test: half of them
        let train = data(&[(true, true), (true, true), (false, false), (false, false)]);
        let test = data(&[(true, true), (false, true), (false, false), (false, false)]);
        let r = vulnerability(&one_rule(), &train, &test).unwrap();
        assert_eq!(r.tau_per_label["1"], 0.5);
        assert_eq!(r.tau_per_label["0"], 0.0);
        assert_eq!(r.label_priors["1"], 0.5);
        assert_eq!(r.overall, 0.5 + 0.5 * 0.5 * 0.5);
    }

    #[test]
    fn missing_label_is_flagged() {
        let train = data(&[(true, true), (false, false)]);
        let test = data(&[(true, true), (false, true)]);
        let r = vulnerability(&one_rule(), &train, &test).unwrap();
        assert_eq!(r.undefined_labels, vec!["0".to_string()]);
        assert_eq!(r.tau_per_label["0"], 0.0);
    }

    #[test]
    fn accuracy_delegates() {
        let d = data(&[(true, true), (false, true)]);
        assert_eq!(accuracy_report(&RuleList::constant(true), &d).unwrap(), 1.0);
    }
}
