use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mechanisms::PrivacyBudget;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopReason {
    MaxLength,
    Support,
    NoImprovement,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::MaxLength => "MAX_LENGTH",
            StopReason::Support => "SUPPORT",
            StopReason::NoImprovement => "NO_IMPROVEMENT",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rows a budgeted query reads, named relative to the rules chosen so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum Scope {
    /// Rows not captured by the first `after` selected rules.
    Remainder { after: usize },
    /// Rows captured by selected rule `rule` (1-based).
    Captured { rule: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessKind {
    SupportCheck,
    Selection,
    Prediction,
}

/// One budgeted query, its scope and its cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Access {
    pub node: usize,
    pub kind: AccessKind,
    #[serde(flatten)]
    pub scope: Scope,
    pub epsilon: f64,
    pub delta: f64,
}

/// What happened at one node of the private learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node: usize,
    pub n_remaining: usize,
    pub noisy_support: f64,
    /// Index into the mined rule set of the chosen rule, if any.
    pub chosen: Option<usize>,
    /// Selection score of the winner (noisy Gini, or exact Gini for the
    /// exponential mechanism).
    pub score: Option<f64>,
    pub noise_scale: Option<f64>,
}

/// Everything needed to replay the privacy accounting of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub mechanism: String,
    pub epsilon_total: f64,
    pub delta_total: f64,
    pub epsilon_node: f64,
    pub delta_node: f64,
    pub max_length: usize,
    pub release_counts: bool,
    pub lambda_abs: usize,
    pub threshold: u64,
    pub nodes: Vec<NodeRecord>,
    pub accesses: Vec<Access>,
    pub stop_reason: StopReason,
}

impl TrainTrace {
    pub(crate) fn start(mechanism: &str, budget: &PrivacyBudget, lambda_abs: usize, threshold: u64) -> Self {
        TrainTrace {
            mechanism: mechanism.to_string(),
            epsilon_total: budget.epsilon_total(),
            delta_total: budget.delta_total(),
            epsilon_node: budget.epsilon_node(),
            delta_node: budget.delta_node(),
            max_length: budget.max_length(),
            release_counts: budget.release_counts(),
            lambda_abs,
            threshold,
            nodes: Vec::new(),
            accesses: Vec::new(),
            stop_reason: StopReason::MaxLength,
        }
    }

    pub(crate) fn charge(&mut self, node: usize, kind: AccessKind, scope: Scope, epsilon: f64, delta: f64) {
        self.accesses.push(Access {
            node,
            kind,
            scope,
            epsilon,
            delta,
        });
    }

    /// Number of rules selected before the default rule.
    pub fn selected_rules(&self) -> usize {
        self.nodes.iter().filter(|n| n.chosen.is_some()).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Outcome of replaying a trace's accounting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub selected_rules: usize,
    pub max_node_accesses: usize,
    /// Worst total ε charged to any single record.
    pub max_record_epsilon: f64,
    pub max_record_delta: f64,
    pub epsilon_allowance: f64,
    pub delta_allowance: f64,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const SLACK: f64 = 1e-9;

/// Checks that no record is charged more than the total budget.
///
/// Rows fall into groups: those captured by selected rule `j`, and the final
/// remainder. Queries on one group compose sequentially; queries on
/// different groups compose in parallel.
pub fn audit(trace: &TrainTrace) -> AuditReport {
    let mut violations = Vec::new();
    let selected = trace.selected_rules();
    if selected + 1 > trace.max_length {
        violations.push(format!(
            "{} rules plus default exceed max length {}",
            selected, trace.max_length
        ));
    }

    let mut per_node: BTreeMap<usize, usize> = BTreeMap::new();
    for a in &trace.accesses {
        *per_node.entry(a.node).or_default() += 1;
        let bad_scope = match a.scope {
            Scope::Remainder { after } => after > selected,
            Scope::Captured { rule } => rule == 0 || rule > selected,
        };
        if bad_scope {
            violations.push(format!("access {a:?} refers to a rule that was never selected"));
        }
        if a.epsilon > trace.epsilon_node * (1.0 + SLACK) {
            violations.push(format!("access {a:?} spends more than epsilon_node"));
        }
    }
    let max_node_accesses = per_node.values().copied().max().unwrap_or(0);
    if max_node_accesses > 3 {
        violations.push(format!("a node made {max_node_accesses} budgeted accesses"));
    }

    let touches = |scope: Scope, group: Group| match (scope, group) {
        (Scope::Remainder { after }, Group::Captured(j)) => after < j,
        (Scope::Remainder { .. }, Group::Rest) => true,
        (Scope::Captured { rule }, Group::Captured(j)) => rule == j,
        (Scope::Captured { .. }, Group::Rest) => false,
    };
    let groups = (1..=selected).map(Group::Captured).chain(std::iter::once(Group::Rest));
    let mut max_eps = 0.0f64;
    let mut max_delta = 0.0f64;
    for group in groups {
        let (eps, delta) = trace
            .accesses
            .iter()
            .filter(|a| touches(a.scope, group))
            .fold((0.0, 0.0), |(e, d), a| (e + a.epsilon, d + a.delta));
        max_eps = max_eps.max(eps);
        max_delta = max_delta.max(delta);
    }
    if max_eps > trace.epsilon_total * (1.0 + SLACK) {
        violations.push(format!(
            "a record is charged epsilon {max_eps} above the total {}",
            trace.epsilon_total
        ));
    }
    if max_delta > trace.delta_total * (1.0 + SLACK) {
        violations.push(format!(
            "a record is charged delta {max_delta} above the total {}",
            trace.delta_total
        ));
    }
    AuditReport {
        selected_rules: selected,
        max_node_accesses,
        max_record_epsilon: max_eps,
        max_record_delta: max_delta,
        epsilon_allowance: trace.epsilon_total,
        delta_allowance: trace.delta_total,
        violations,
    }
}

#[derive(Clone, Copy)]
enum Group {
    Captured(usize),
    Rest,
}
