use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use crate::bits::RowSet;
use crate::error::{Error, Result};

use super::BinaryDataset;

/// A header-first table of string cells, before any typing.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_raw_csv(path: impl AsRef<Path>) -> Result<RawTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok(RawTable { header, rows })
}

/// Preparation recipe, stored as `key=value` lines.
///
/// Recognised keys: `label`, `positive`, `drop`, `categorical`,
/// `numeric_bins` and per-column `bins.<column>`. Lines starting with `#`
/// are comments.
#[derive(Clone, Debug, PartialEq)]
pub struct Recipe {
    pub label_column: String,
    /// When set, the label is `cell == positive`; otherwise label cells must be `0`/`1`.
    pub positive_label: Option<String>,
    pub drop: Vec<String>,
    pub categorical: Vec<String>,
    pub numeric_bins: usize,
    pub column_bins: BTreeMap<String, usize>,
}

impl Recipe {
    pub fn new(label_column: impl Into<String>, numeric_bins: usize) -> Self {
        Recipe {
            label_column: label_column.into(),
            positive_label: None,
            drop: Vec::new(),
            categorical: Vec::new(),
            numeric_bins,
            column_bins: BTreeMap::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut recipe = Recipe::new("", 2);
        let mut have_label = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Recipe { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let list = || -> Vec<String> {
                value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            };
            let bins = || -> Result<usize> {
                value
                    .parse::<usize>()
                    .map_err(|_| err(format!("bin count {value:?} is not an integer")))
            };
            match key {
                "label" => {
                    recipe.label_column = value.to_string();
                    have_label = true;
                }
                "positive" => recipe.positive_label = Some(value.to_string()),
                "drop" => recipe.drop = list(),
                "categorical" => recipe.categorical = list(),
                "numeric_bins" => recipe.numeric_bins = bins()?,
                k if k.starts_with("bins.") => {
                    recipe.column_bins.insert(k["bins.".len()..].to_string(), bins()?);
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        if !have_label {
            return Err(Error::Recipe {
                line: 0,
                message: "missing `label` key".into(),
            });
        }
        recipe.validate()?;
        Ok(recipe)
    }

    fn validate(&self) -> Result<()> {
        if self.numeric_bins < 2 || self.column_bins.values().any(|&b| b < 2) {
            return Err(Error::param("numeric bin counts must be at least 2"));
        }
        Ok(())
    }

    fn bins_for(&self, column: &str) -> usize {
        self.column_bins.get(column).copied().unwrap_or(self.numeric_bins)
    }
}

#[derive(Clone, Debug)]
pub struct BinarizeOutput {
    pub dataset: BinaryDataset,
    pub warnings: Vec<String>,
}

const MISSING: [&str; 3] = ["", "?", "NA"];

/// One-hot encodes categorical columns and quantile-bins numeric ones.
///
/// A column is numeric when every non-missing cell parses as a number and it
/// is not listed as categorical. Bin edges are nearest-rank percentiles
/// `k/q` for `k = 1..q`; duplicate edges collapse, so heavily tied columns
/// yield fewer bins. Missing numeric cells fall in no bin.
pub fn binarize(raw: &RawTable, recipe: &Recipe) -> Result<BinarizeOutput> {
    recipe.validate()?;
    let n = raw.rows.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let label_pos = raw
        .header
        .iter()
        .position(|h| *h == recipe.label_column)
        .ok_or_else(|| Error::MissingLabelColumn(recipe.label_column.clone()))?;

    let mut labels = RowSet::empty(n);
    for (i, row) in raw.rows.iter().enumerate() {
        let cell = row[label_pos].as_str();
        let positive = match &recipe.positive_label {
            Some(p) => cell == p,
            None => match cell {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::NonBinaryCell {
                        row: i + 1,
                        column: recipe.label_column.clone(),
                        value: other.to_string(),
                    })
                }
            },
        };
        if positive {
            labels.insert(i);
        }
    }

    let mut names = Vec::new();
    let mut columns = Vec::new();
    let mut warnings = Vec::new();
    for (j, col_name) in raw.header.iter().enumerate() {
        if j == label_pos || recipe.drop.contains(col_name) {
            continue;
        }
        let cells: Vec<&str> = raw.rows.iter().map(|r| r[j].as_str()).collect();
        let numeric = if recipe.categorical.contains(col_name) {
            None
        } else {
            parse_numeric(&cells)
        };
        match numeric {
            Some(values) => {
                let present: Vec<f64> = values.iter().flatten().copied().collect();
                let edges = nearest_rank_edges(&present, recipe.bins_for(col_name));
                if edges.is_empty() {
                    let msg = format!("numeric column `{col_name}` is constant; emitting a single indicator");
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
                for (name, set) in bin_indicators(col_name, &values, &edges) {
                    names.push(name);
                    columns.push(set);
                }
            }
            None => {
                let categories: BTreeSet<&str> = cells.iter().copied().collect();
                for cat in categories {
                    names.push(format!("{col_name}={cat}"));
                    columns.push(RowSet::from_indices(
                        n,
                        cells.iter().enumerate().filter(|(_, &c)| c == cat).map(|(i, _)| i),
                    ));
                }
            }
        }
    }
    Ok(BinarizeOutput {
        dataset: BinaryDataset::from_columns(names, columns, labels),
        warnings,
    })
}

fn parse_numeric(cells: &[&str]) -> Option<Vec<Option<f64>>> {
    let mut any = false;
    let values = cells
        .iter()
        .map(|c| {
            if MISSING.contains(c) {
                Ok(None)
            } else {
                any = true;
                c.parse::<f64>().map(Some).map_err(|_| ())
            }
        })
        .collect::<Result<Vec<_>, ()>>()
        .ok()?;
    any.then_some(values)
}

/// Interior cut points; values `<= edge[0]` form the first bin.
pub(crate) fn nearest_rank_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let Some(&max) = sorted.last() else {
        return Vec::new();
    };
    let mut edges: Vec<f64> = Vec::new();
    for k in 1..bins {
        let rank = (k * n).div_ceil(bins).max(1);
        let v = sorted[rank - 1];
        if v < max && edges.last().is_none_or(|&last| v > last) {
            edges.push(v);
        }
    }
    edges
}

fn bin_indicators(column: &str, values: &[Option<f64>], edges: &[f64]) -> Vec<(String, RowSet)> {
    let n = values.len();
    if edges.is_empty() {
        let set = RowSet::from_indices(
            n,
            values.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i),
        );
        return vec![(format!("{column}:all"), set)];
    }
    let mut out = Vec::with_capacity(edges.len() + 1);
    for b in 0..=edges.len() {
        let lo = b.checked_sub(1).map(|i| edges[i]);
        let hi = edges.get(b).copied();
        let name = match (lo, hi) {
            (None, Some(h)) => format!("{column}<={h}"),
            (Some(l), Some(h)) => format!("{l}<{column}<={h}"),
            (Some(l), None) => format!("{column}>{l}"),
            (None, None) => unreachable!(),
        };
        let members = values.iter().enumerate().filter_map(|(i, v)| {
            let v = (*v)?;
            let above = lo.is_none_or(|l| v > l);
            let below = hi.is_none_or(|h| v <= h);
            (above && below).then_some(i)
        });
        out.push((name, RowSet::from_indices(n, members)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(header: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        }
    }

    #[test]
    fn two_bins_split_at_median() {
        let t = table(&["x", "y"], &[&["1", "0"], &["2", "1"], &["3", "0"], &["4", "1"]]);
        let out = binarize(&t, &Recipe::new("y", 2)).unwrap();
        let d = out.dataset;
        assert_eq!(d.feature_names(), ["x<=2", "x>2"]);
        let low: Vec<bool> = (0..4).map(|i| d.value(i, 0)).collect();
        assert_eq!(low, vec![true, true, false, false]);
    }

    #[test]
    fn categorical_one_hot_sorted() {
        let t = table(&["c", "y"], &[&["b", "0"], &["a", "1"], &["b", "1"]]);
        let d = binarize(&t, &Recipe::new("y", 2)).unwrap().dataset;
        assert_eq!(d.feature_names(), ["c=a", "c=b"]);
        assert_eq!(d.row(0), vec![false, true]);
    }

    #[test]
    fn tied_edges_collapse() {
        let vals = [0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 9.0];
        assert_eq!(nearest_rank_edges(&vals, 4), vec![0.0, 2.0]);
        assert_eq!(nearest_rank_edges(&[5.0; 10], 5), Vec::<f64>::new());
    }

    #[test]
    fn constant_column_warns_with_single_indicator() {
        let t = table(&["x", "y"], &[&["7", "0"], &["7", "1"]]);
        let out = binarize(&t, &Recipe::new("y", 3)).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.dataset.feature_names(), ["x:all"]);
        assert!(out.dataset.value(0, 0) && out.dataset.value(1, 0));
    }

    #[test]
    fn recipe_parsing() {
        let r =
            Recipe::parse("# compas\nlabel = two_year_recid\ndrop=sex, race\nnumeric_bins=5\nbins.age=3\n").unwrap();
        assert_eq!(r.label_column, "two_year_recid");
        assert_eq!(r.drop, vec!["sex", "race"]);
        assert_eq!(r.bins_for("age"), 3);
        assert_eq!(r.bins_for("priors"), 5);
        assert!(Recipe::parse("drop=a\n").is_err());
        assert!(Recipe::parse("label=y\nnumeric_bins=1\n").is_err());
        assert!(Recipe::parse("label=y\nwat=1\n").is_err());
    }

    #[test]
    fn positive_label_mapping_and_drop() {
        let t = table(&["s", "x", "inc"], &[&["m", "1", ">50K"], &["f", "2", "<=50K"]]);
        let mut r = Recipe::new("inc", 2);
        r.positive_label = Some(">50K".into());
        r.drop = vec!["s".into()];
        let d = binarize(&t, &r).unwrap().dataset;
        assert!(d.label(0) && !d.label(1));
        assert!(d.feature_names().iter().all(|n| n.starts_with('x')));
    }

    #[test]
    fn missing_numeric_cells_fall_in_no_bin() {
        let t = table(&["x", "y"], &[&["1", "0"], &["?", "1"], &["3", "0"]]);
        let d = binarize(&t, &Recipe::new("y", 2)).unwrap().dataset;
        assert_eq!(d.row(1), vec![false, false]);
    }
}
