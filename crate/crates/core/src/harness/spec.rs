use std::path::{Path, PathBuf};

use crate::dataset::{binarize, load_csv, read_raw_csv, BinaryDataset, Recipe};
use crate::error::{Error, Result};
use crate::learner::{LearnerConfig, Method};

/// `n_points` log-spaced values from 0.01 to 100.
pub fn default_epsilon_grid() -> Vec<f64> {
    let n_points = 12;
    (0..n_points)
        .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / (n_points - 1) as f64))
        .collect()
}

/// How `δ` is chosen for each run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaRule {
    /// `1 / n²` with `n` the training-set size.
    InverseSquare,
    Fixed(f64),
}

impl DeltaRule {
    pub fn resolve(self, n_train: usize) -> f64 {
        match self {
            DeltaRule::InverseSquare => 1.0 / (n_train as f64 * n_train as f64),
            DeltaRule::Fixed(d) => d,
        }
    }
}

/// Where the sweep's data comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    /// A prepared 0/1 CSV and its label column.
    Binary { path: PathBuf, label: String },
    /// A raw CSV binarized with a recipe.
    Raw { path: PathBuf, recipe: PathBuf },
}

impl DatasetSource {
    pub fn load(&self) -> Result<BinaryDataset> {
        match self {
            DatasetSource::Binary { path, label } => load_csv(path, label),
            DatasetSource::Raw { path, recipe } => {
                let recipe = Recipe::load(recipe)?;
                let out = binarize(&read_raw_csv(path)?, &recipe)?;
                for w in &out.warnings {
                    log::warn!("{w}");
                }
                Ok(out.dataset)
            }
        }
    }
}

/// Everything a sweep needs besides the data.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub dataset: Option<DatasetSource>,
    /// Fixed rule-set file; when absent rules are mined per run.
    pub rules: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub epsilons: Vec<f64>,
    pub runs: usize,
    pub base_seed: u64,
    pub learner: LearnerConfig,
    pub delta: DeltaRule,
    pub release_counts: bool,
    pub train_fraction: f64,
    pub max_arity: usize,
    pub rule_min_support: f64,
    pub record_wall_time: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            dataset: None,
            rules: None,
            methods: vec![
                Method::NonPrivate,
                Method::Private(crate::mechanisms::MechanismKind::SmoothLaplace),
            ],
            epsilons: default_epsilon_grid(),
            runs: 30,
            base_seed: 0,
            learner: LearnerConfig::default(),
            delta: DeltaRule::InverseSquare,
            release_counts: true,
            train_fraction: 0.7,
            max_arity: 2,
            rule_min_support: 0.0,
            record_wall_time: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Recipe {
        line,
        message: format!("cannot parse `{value}` for `{key}`"),
    })
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::param("a sweep needs at least one run"));
        }
        if self.methods.is_empty() {
            return Err(Error::param("a sweep needs at least one method"));
        }
        if self.epsilons.is_empty() {
            return Err(Error::param("a sweep needs at least one epsilon"));
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::param("every epsilon must be positive and finite"));
        }
        if self.epsilons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("the epsilon grid must be strictly increasing"));
        }
        if let DeltaRule::Fixed(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::param(format!("delta {d} outside (0, 1)")));
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::param("train fraction must lie in (0, 1)"));
        }
        self.learner.validate()
    }

    /// Reads `key = value` lines; relative paths resolve against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        SweepSpec::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec = SweepSpec::default();
        let mut data_path = None;
        let mut label = None;
        let mut recipe = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Recipe {
                line,
                message: "expected key = value".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key {
                "dataset" => data_path = Some(base_dir.join(value)),
                "label" => label = Some(value.to_string()),
                "recipe" => recipe = Some(base_dir.join(value)),
                "rules" => spec.rules = Some(base_dir.join(value)),
                "mechanisms" => spec.methods = list().map(str::parse).collect::<Result<_>>()?,
                "epsilons" => {
                    spec.epsilons = if value == "default" {
                        default_epsilon_grid()
                    } else {
                        list().map(|v| parse_num(line, key, v)).collect::<Result<_>>()?
                    }
                }
                "runs" => spec.runs = parse_num(line, key, value)?,
                "seed" => spec.base_seed = parse_num(line, key, value)?,
                "max_length" => spec.learner.max_length = parse_num(line, key, value)?,
                "min_support" => spec.learner.min_support = parse_num(line, key, value)?,
                "confidence" => spec.learner.confidence = parse_num(line, key, value)?,
                "gamma" => spec.learner.gamma = parse_num(line, key, value)?,
                "delta" => {
                    spec.delta = if value == "inverse_square" {
                        DeltaRule::InverseSquare
                    } else {
                        DeltaRule::Fixed(parse_num(line, key, value)?)
                    }
                }
                "release_counts" => spec.release_counts = parse_num(line, key, value)?,
                "train_fraction" => spec.train_fraction = parse_num(line, key, value)?,
                "max_arity" => spec.max_arity = parse_num(line, key, value)?,
                "rule_min_support" => spec.rule_min_support = parse_num(line, key, value)?,
                "record_wall_time" => spec.record_wall_time = parse_num(line, key, value)?,
                other => {
                    return Err(Error::Recipe {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        spec.dataset = match (data_path, label, recipe) {
            (Some(path), _, Some(recipe)) => Some(DatasetSource::Raw { path, recipe }),
            (Some(path), label, None) => Some(DatasetSource::Binary {
                path,
                label: label.unwrap_or_else(|| "label".to_string()),
            }),
            (None, _, _) => None,
        };
        spec.validate()?;
        Ok(spec)
    }
}
