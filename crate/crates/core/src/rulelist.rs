//! Rules, rule lists, first-match evaluation and model persistence.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bits::RowSet;
use crate::dataset::{Antecedent, BinaryDataset};
use crate::error::{Error, Result};

/// `antecedent → prediction`, optionally carrying the noisy label counts
/// that decided the prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub antecedent: Antecedent,
    pub prediction: bool,
    pub noisy_counts: Option<(f64, f64)>,
}

impl Rule {
    pub fn new(antecedent: Antecedent, prediction: bool) -> Self {
        Rule {
            antecedent,
            prediction,
            noisy_counts: None,
        }
    }

    pub fn default_rule(prediction: bool) -> Self {
        Rule::new(Antecedent::always(), prediction)
    }

    pub fn with_counts(mut self, c0: f64, c1: f64) -> Self {
        self.noisy_counts = Some((c0, c1));
        self
    }

    pub fn is_default(&self) -> bool {
        self.antecedent.is_empty()
    }
}

/// Rows of `active` split by a rule, with label counts of the captured part.
#[derive(Clone, Debug, PartialEq)]
pub struct CaptureResult {
    pub captured: RowSet,
    pub remaining: RowSet,
    /// `(label-0 count, label-1 count)` among captured rows.
    pub label_counts: (usize, usize),
}

/// Splits `active` into the rows matching `antecedent` and the rest.
pub fn capture(antecedent: &Antecedent, data: &BinaryDataset, active: &RowSet) -> CaptureResult {
    let mut captured = antecedent.rows(data);
    captured.intersect_with(active);
    let remaining = active.difference(&captured);
    let positives = captured.intersection_count(data.labels());
    let total = captured.count();
    CaptureResult {
        captured,
        remaining,
        label_counts: (total - positives, positives),
    }
}

/// An ordered list of rules ending in exactly one default rule.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleList {
    rules: Vec<Rule>,
}

impl RuleList {
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        match rules.last() {
            None => return Err(Error::InvalidRuleList("no rules".into())),
            Some(last) if !last.is_default() => {
                return Err(Error::InvalidRuleList("last rule must have an empty antecedent".into()))
            }
            _ => {}
        }
        if let Some(i) = rules[..rules.len() - 1].iter().position(Rule::is_default) {
            return Err(Error::InvalidRuleList(format!(
                "rule {i} has an empty antecedent but is not last"
            )));
        }
        Ok(RuleList { rules })
    }

    /// A list holding only the default rule.
    pub fn constant(prediction: bool) -> Self {
        RuleList {
            rules: vec![Rule::default_rule(prediction)],
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Number of rules including the default rule.
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn default_prediction(&self) -> bool {
        self.rules.last().expect("rule list is never empty").prediction
    }

    /// Fails if any antecedent references a feature outside `0..n_features`.
    pub fn check_features(&self, n_features: usize) -> Result<()> {
        for rule in &self.rules {
            if let Some(f) = rule.antecedent.max_feature() {
                if f >= n_features {
                    return Err(Error::InvalidRuleList(format!(
                        "feature index {f} out of range for {n_features} features"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Index of the first rule matching `sample`.
    pub fn first_match(&self, sample: &[bool]) -> usize {
        self.rules
            .iter()
            .position(|r| r.antecedent.matches(sample))
            .expect("default rule matches every sample")
    }

    pub fn predict(&self, sample: &[bool]) -> bool {
        self.rules[self.first_match(sample)].prediction
    }

    /// Rows of `data` assigned to each rule under first-match semantics.
    /// The sets partition all rows.
    pub fn partition(&self, data: &BinaryDataset) -> Vec<RowSet> {
        let mut active = data.all_rows();
        self.rules
            .iter()
            .map(|r| {
                let c = capture(&r.antecedent, data, &active);
                active = c.remaining;
                c.captured
            })
            .collect()
    }

    pub fn predict_all(&self, data: &BinaryDataset) -> RowSet {
        let mut out = RowSet::empty(data.n_samples());
        for (rule, rows) in self.rules.iter().zip(self.partition(data)) {
            if rule.prediction {
                for i in rows.iter() {
                    out.insert(i);
                }
            }
        }
        out
    }

    pub fn accuracy(&self, data: &BinaryDataset) -> Result<f64> {
        if data.n_samples() == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut correct = 0;
        for (rule, rows) in self.rules.iter().zip(self.partition(data)) {
            let pos = rows.intersection_count(data.labels());
            correct += if rule.prediction { pos } else { rows.count() - pos };
        }
        Ok(correct as f64 / data.n_samples() as f64)
    }

    pub fn to_json(&self, feature_names: &[String]) -> Result<String> {
        let entries: Vec<RuleJson> = self
            .rules
            .iter()
            .map(|r| RuleJson {
                antecedent: r.antecedent.signed_names(feature_names),
                prediction: u8::from(r.prediction),
                noisy_c0: r.noisy_counts.map(|c| c.0),
                noisy_c1: r.noisy_counts.map(|c| c.1),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&entries)?)
    }

    pub fn from_json(text: &str, feature_names: &[String]) -> Result<Self> {
        let entries: Vec<RuleJson> = serde_json::from_str(text)?;
        let rules = entries
            .into_iter()
            .map(|e| {
                let prediction = match e.prediction {
                    0 => false,
                    1 => true,
                    p => return Err(Error::InvalidRuleList(format!("prediction {p} is not 0 or 1"))),
                };
                let noisy_counts = match (e.noisy_c0, e.noisy_c1) {
                    (Some(a), Some(b)) => Some((a, b)),
                    (None, None) => None,
                    _ => return Err(Error::InvalidRuleList("noisy counts must come in pairs".into())),
                };
                Ok(Rule {
                    antecedent: Antecedent::parse_signed(&e.antecedent, feature_names)?,
                    prediction,
                    noisy_counts,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RuleList::new(rules)
    }

    /// `if a && !b then 1` / `else if ...` / `else 0`, one rule per line.
    pub fn pretty(&self, feature_names: &[String]) -> String {
        let mut out = String::new();
        for (i, rule) in self.rules.iter().enumerate() {
            let label = u8::from(rule.prediction);
            let counts = rule
                .noisy_counts
                .map(|(c0, c1)| format!("  [c0={c0:.1}, c1={c1:.1}]"))
                .unwrap_or_default();
            let _ = if rule.is_default() {
                if i == 0 {
                    writeln!(out, "predict {label}{counts}")
                } else {
                    writeln!(out, "else predict {label}{counts}")
                }
            } else {
                let kw = if i == 0 { "if" } else { "else if" };
                writeln!(
                    out,
                    "{kw} {} then predict {label}{counts}",
                    rule.antecedent.describe(feature_names)
                )
            };
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct RuleJson {
    antecedent: Vec<String>,
    prediction: u8,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    noisy_c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    noisy_c1: Option<f64>,
}
