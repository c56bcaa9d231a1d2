//! Binary datasets: loading, splitting, binarization and candidate-rule mining.

mod binarize;
mod mining;

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::bits::RowSet;
use crate::error::{Error, Result};

pub use binarize::{binarize, read_raw_csv, BinarizeOutput, RawTable, Recipe};
pub use mining::{mine_rules, Antecedent, Literal, MinedRuleSet};

/// `n` samples of `m` binary features with a binary label.
///
/// Features are stored column-wise as row sets so that rule captures reduce
/// to word-level `AND`s.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryDataset {
    feature_names: Vec<String>,
    columns: Vec<RowSet>,
    labels: RowSet,
}

impl BinaryDataset {
    /// Builds a dataset from row-major cells.
    pub fn from_rows(feature_names: Vec<String>, rows: &[Vec<bool>], labels: &[bool]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::param(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let n = rows.len();
        let m = feature_names.len();
        let mut columns = vec![RowSet::empty(n); m];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: m,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v {
                    columns[j].insert(i);
                }
            }
        }
        Ok(BinaryDataset {
            feature_names,
            columns,
            labels: RowSet::from_bools(labels),
        })
    }

    pub(crate) fn from_columns(feature_names: Vec<String>, columns: Vec<RowSet>, labels: RowSet) -> Self {
        debug_assert_eq!(feature_names.len(), columns.len());
        debug_assert!(columns.iter().all(|c| c.universe() == labels.universe()));
        BinaryDataset {
            feature_names,
            columns,
            labels,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.labels.universe()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn value(&self, row: usize, feature: usize) -> bool {
        self.columns[feature].contains(row)
    }

    pub fn label(&self, row: usize) -> bool {
        self.labels.contains(row)
    }

    pub fn row(&self, row: usize) -> Vec<bool> {
        self.columns.iter().map(|c| c.contains(row)).collect()
    }

    pub fn labels(&self) -> &RowSet {
        &self.labels
    }

    pub fn column(&self, feature: usize) -> &RowSet {
        &self.columns[feature]
    }

    pub fn all_rows(&self) -> RowSet {
        RowSet::full(self.n_samples())
    }

    pub fn positive_count(&self) -> usize {
        self.labels.count()
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> BinaryDataset {
        let n = rows.len();
        let pick = |set: &RowSet| {
            RowSet::from_indices(
                n,
                rows.iter()
                    .enumerate()
                    .filter(|(_, &r)| set.contains(r))
                    .map(|(i, _)| i),
            )
        };
        BinaryDataset {
            feature_names: self.feature_names.clone(),
            columns: self.columns.iter().map(pick).collect(),
            labels: pick(&self.labels),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        let header: Vec<&str> = self
            .feature_names
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(label_column))
            .collect();
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        let mut line = String::with_capacity(2 * (self.n_features() + 1));
        for i in 0..self.n_samples() {
            line.clear();
            for c in &self.columns {
                line.push(if c.contains(i) { '1' } else { '0' });
                line.push(',');
            }
            line.push(if self.label(i) { '1' } else { '0' });
            writeln!(out, "{line}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Reads a header-first CSV whose cells are all `0` or `1`.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<BinaryDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_pos = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_pos)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(feature_names.len());
        for (j, cell) in record.iter().enumerate() {
            let v = match cell.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::NonBinaryCell {
                        row: i + 1,
                        column: header[j].clone(),
                        value: other.to_string(),
                    })
                }
            };
            if j == label_pos {
                labels.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    BinaryDataset::from_rows(feature_names, &rows, &labels)
}

/// Random row partition into `⌊fraction·n⌋` training rows and the rest.
pub fn split(dataset: &BinaryDataset, train_fraction: f64, seed: u64) -> Result<(BinaryDataset, BinaryDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let (train_idx, test_idx) = split_indices(dataset.n_samples(), train_fraction, seed)?;
    Ok((dataset.select_rows(&train_idx), dataset.select_rows(&test_idx)))
}

/// Index-level version of [`split`]; both halves are sorted.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train < 1 {
        return Err(Error::param(format!(
            "train fraction {train_fraction} of {n} rows leaves no training rows"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
