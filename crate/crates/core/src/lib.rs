//! Differentially-private greedy rule lists.
//!
//! The crate learns ordered `if … else if … else` classifiers over binary
//! features. Its private learner picks each rule with a noisy Gini impurity
//! whose noise is calibrated to the *smooth* sensitivity of the impurity,
//! which shrinks as the number of samples still to classify grows.
//!
//! ```
//! use dprl::dataset::{mine_rules, BinaryDataset};
//! use dprl::learner::{dp_greedy_rl, greedy_rl, LearnerConfig};
//! use dprl::mechanisms::{MechanismKind, NoiseSource, PrivacyBudget};
//!
//! let rows: Vec<Vec<bool>> = (0..400).map(|i| vec![i % 2 == 0, i % 3 == 0]).collect();
//! let labels: Vec<bool> = rows.iter().map(|r| r[0]).collect();
//! let data = BinaryDataset::from_rows(vec!["even".into(), "third".into()], &rows, &labels)?;
//! let rules = mine_rules(&data, 1, 0.0)?;
//!
//! let config = LearnerConfig::default();
//! let exact = greedy_rl(&data, &rules, &config)?;
//! assert_eq!(exact.accuracy(&data)?, 1.0);
//!
//! let budget = PrivacyBudget::new(10.0, 1e-6, config.max_length, true)?;
//! let mut noise = NoiseSource::new(7);
//! let (model, trace) = dp_greedy_rl(&data, &rules, &config, MechanismKind::SmoothLaplace, &budget, &mut noise)?;
//! assert!(model.len() <= config.max_length);
//! assert!(dprl::learner::audit(&trace).passed());
//! # Ok::<(), dprl::Error>(())
//! ```

pub mod bits;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod gini;
pub mod harness;
pub mod learner;
pub mod mechanisms;
pub mod rulelist;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/rule-lists.md")]
    mod rule_lists {}
    #[doc = include_str!("../../../book/src/sensitivity.md")]
    mod sensitivity {}
    #[doc = include_str!("../../../book/src/mechanisms.md")]
    mod mechanisms {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
