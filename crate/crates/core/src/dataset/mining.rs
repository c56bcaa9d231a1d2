use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::RowSet;
use crate::error::{Error, Result};

use super::BinaryDataset;

/// A binary feature or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub feature: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(feature: usize) -> Self {
        Literal {
            feature,
            negated: false,
        }
    }

    pub fn negative(feature: usize) -> Self {
        Literal { feature, negated: true }
    }

    pub fn holds(&self, sample: &[bool]) -> bool {
        sample[self.feature] != self.negated
    }

    /// Rows of `data` on which the literal is true.
    pub fn rows(&self, data: &BinaryDataset) -> RowSet {
        let col = data.column(self.feature);
        if self.negated {
            col.complement()
        } else {
            col.clone()
        }
    }

    /// `name` or `!name`.
    pub fn signed_name(&self, feature_names: &[String]) -> String {
        let name = &feature_names[self.feature];
        if self.negated {
            format!("!{name}")
        } else {
            name.clone()
        }
    }

    pub fn parse_signed(text: &str, feature_names: &[String]) -> Result<Self> {
        let (negated, name) = match text.strip_prefix('!') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let feature = feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
        Ok(Literal { feature, negated })
    }
}

/// Conjunction of literals; the empty conjunction is always true.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Antecedent(Vec<Literal>);

impl Antecedent {
    pub fn always() -> Self {
        Antecedent(Vec::new())
    }

    pub fn new(mut literals: Vec<Literal>) -> Self {
        literals.sort();
        literals.dedup();
        Antecedent(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matches(&self, sample: &[bool]) -> bool {
        self.0.iter().all(|l| l.holds(sample))
    }

    /// `ℓ ∧ ¬ℓ` style antecedents never fire.
    pub fn is_contradictory(&self) -> bool {
        self.0
            .windows(2)
            .any(|w| w[0].feature == w[1].feature && w[0].negated != w[1].negated)
    }

    pub fn rows(&self, data: &BinaryDataset) -> RowSet {
        let mut rows = data.all_rows();
        for lit in &self.0 {
            let col = data.column(lit.feature);
            if lit.negated {
                rows.difference_with(col);
            } else {
                rows.intersect_with(col);
            }
        }
        rows
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.0.iter().map(|l| l.feature).max()
    }

    pub fn signed_names(&self, feature_names: &[String]) -> Vec<String> {
        self.0.iter().map(|l| l.signed_name(feature_names)).collect()
    }

    pub fn describe(&self, feature_names: &[String]) -> String {
        if self.0.is_empty() {
            "True".to_string()
        } else {
            self.signed_names(feature_names).join(" && ")
        }
    }

    pub fn parse_signed(names: &[String], feature_names: &[String]) -> Result<Self> {
        names
            .iter()
            .map(|n| Literal::parse_signed(n, feature_names))
            .collect::<Result<Vec<_>>>()
            .map(Antecedent::new)
    }
}

impl fmt::Display for Antecedent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("True");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{}x{}", if l.negated { "!" } else { "" }, l.feature)?;
        }
        Ok(())
    }
}

/// The public candidate rule set handed to the learners.
#[derive(Clone, Debug, PartialEq)]
pub struct MinedRuleSet {
    pub antecedents: Vec<Antecedent>,
    pub max_arity: usize,
}

impl MinedRuleSet {
    pub fn len(&self) -> usize {
        self.antecedents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.antecedents.is_empty()
    }

    pub fn to_json(&self, feature_names: &[String]) -> Result<String> {
        let file = RuleSetFile {
            max_arity: self.max_arity,
            antecedents: self.antecedents.iter().map(|a| a.signed_names(feature_names)).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str, feature_names: &[String]) -> Result<Self> {
        let file: RuleSetFile = serde_json::from_str(text)?;
        let antecedents = file
            .antecedents
            .iter()
            .map(|names| Antecedent::parse_signed(names, feature_names))
            .collect::<Result<Vec<_>>>()?;
        Ok(MinedRuleSet {
            antecedents,
            max_arity: file.max_arity,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RuleSetFile {
    max_arity: usize,
    antecedents: Vec<Vec<String>>,
}

/// Enumerates every literal and (for arity 2) every pair of literals over
/// distinct features, keeping those whose support in `data` reaches
/// `min_support_fraction · n`.
///
/// Order: single literals first, then pairs, each lexicographic by feature
/// index with the positive literal before the negated one.
pub fn mine_rules(data: &BinaryDataset, max_arity: usize, min_support_fraction: f64) -> Result<MinedRuleSet> {
    if !(1..=2).contains(&max_arity) {
        return Err(Error::param(format!("max arity {max_arity} not in {{1, 2}}")));
    }
    if !(0.0..=1.0).contains(&min_support_fraction) {
        return Err(Error::param(format!(
            "min support {min_support_fraction} outside [0, 1]"
        )));
    }
    let threshold = min_support_fraction * data.n_samples() as f64;
    let literals: Vec<Literal> = (0..data.n_features())
        .flat_map(|f| [Literal::positive(f), Literal::negative(f)])
        .collect();
    let literal_rows: Vec<RowSet> = literals.iter().map(|l| l.rows(data)).collect();

    let mut antecedents = Vec::new();
    for (l, rows) in literals.iter().zip(&literal_rows) {
        if rows.count() as f64 >= threshold {
            antecedents.push(Antecedent::new(vec![*l]));
        }
    }
    if max_arity == 2 {
        for (i, (a, rows_a)) in literals.iter().zip(&literal_rows).enumerate() {
            for (b, rows_b) in literals.iter().zip(&literal_rows).skip(i + 1) {
                if a.feature == b.feature {
                    continue;
                }
                if rows_a.intersection_count(rows_b) as f64 >= threshold {
                    antecedents.push(Antecedent::new(vec![*a, *b]));
                }
            }
        }
    }
    if antecedents.is_empty() {
        return Err(Error::NoRules);
    }
    Ok(MinedRuleSet { antecedents, max_arity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn data(rows: &[&[bool]], labels: &[bool]) -> BinaryDataset {
        let m = rows[0].len();
        let names = (0..m).map(|j| format!("f{j}")).collect();
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.to_vec()).collect();
        BinaryDataset::from_rows(names, &rows, labels).unwrap()
    }

    #[test]
    fn arity_one_gives_two_literals_per_feature() {
        let d = data(&[&[true, false], &[false, true]], &[true, false]);
        let r = mine_rules(&d, 1, 0.0).unwrap();
        assert_eq!(r.len(), 4);
        let expect = [
            Literal::positive(0),
            Literal::negative(0),
            Literal::positive(1),
            Literal::negative(1),
        ];
        for (a, l) in r.antecedents.iter().zip(expect) {
            assert_eq!(a.literals(), &[l]);
        }
    }

    #[test]
    fn arity_two_count_matches_enumeration() {
        let d = data(
            &[&[true, false, true], &[false, true, true], &[true, true, false]],
            &[true, false, true],
        );
        let r = mine_rules(&d, 2, 0.0).unwrap();
        // brute force: all literal subsets of size 1..=2 over distinct features
        let m = 3;
        let mut expected = 0;
        for mask in 0u32..(1 << (2 * m)) {
            let lits: Vec<usize> = (0..2 * m).filter(|b| mask & (1 << b) != 0).collect();
            if lits.is_empty() || lits.len() > 2 {
                continue;
            }
            let feats: HashSet<usize> = lits.iter().map(|l| l / 2).collect();
            if feats.len() == lits.len() {
                expected += 1;
            }
        }
        assert_eq!(expected, 18);
        assert_eq!(r.len(), expected);
        assert!(r.antecedents.iter().all(|a| !a.is_contradictory()));
        let unique: HashSet<_> = r.antecedents.iter().collect();
        assert_eq!(unique.len(), r.len());
    }

    #[test]
    fn zero_support_literal_is_dropped() {
        let rows: Vec<&[bool]> = vec![&[false, true], &[false, false], &[false, true]];
        let d = data(&rows, &[true, false, false]);
        let r = mine_rules(&d, 1, 0.01).unwrap();
        assert!(!r.antecedents.contains(&Antecedent::new(vec![Literal::positive(0)])));
        assert!(r.antecedents.contains(&Antecedent::new(vec![Literal::negative(0)])));
    }

    #[test]
    fn empty_result_is_an_error() {
        let d = data(&[&[false], &[false]], &[true, false]);
        assert!(mine_rules(&d, 1, 1.0).is_ok());
        let d = data(&[&[true], &[false]], &[true, false]);
        assert!(matches!(mine_rules(&d, 2, 0.9), Err(Error::NoRules)));
        assert!(mine_rules(&d, 3, 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = data(&[&[true, false], &[false, true]], &[true, false]);
        let r = mine_rules(&d, 2, 0.0).unwrap();
        let text = r.to_json(d.feature_names()).unwrap();
        assert_eq!(MinedRuleSet::from_json(&text, d.feature_names()).unwrap(), r);
    }
}
