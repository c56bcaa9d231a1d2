use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::learner::Method;

use super::{NoiseScaleRow, SweepResult};

/// Mean and sample standard deviation of one `(method, ε)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub epsilon: f64,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub mean_vuln: f64,
    pub std_vuln: f64,
    /// Non-failed records that entered the statistics.
    pub count: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Per-`(method, ε)` statistics over non-failed records, in record order.
pub fn aggregate(result: &SweepResult) -> Vec<AggregateRow> {
    let mut keys: Vec<(Method, usize, f64)> = Vec::new();
    for r in &result.records {
        if !keys.iter().any(|k| k.0 == r.method && k.1 == r.epsilon_index) {
            keys.push((r.method, r.epsilon_index, r.epsilon));
        }
    }
    keys.into_iter()
        .map(|(method, ei, epsilon)| {
            let ok: Vec<_> = result
                .records
                .iter()
                .filter(|r| r.method == method && r.epsilon_index == ei && !r.failed())
                .collect();
            let acc: Vec<f64> = ok.iter().map(|r| r.test_accuracy).collect();
            let vuln: Vec<f64> = ok.iter().map(|r| r.vulnerability).collect();
            let (mean_acc, std_acc) = mean_std(&acc);
            let (mean_vuln, std_vuln) = mean_std(&vuln);
            AggregateRow {
                method,
                epsilon,
                mean_acc,
                std_acc,
                mean_vuln,
                std_vuln,
                count: ok.len(),
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn finish(out: &mut BufWriter<File>, path: &Path) -> Result<()> {
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_results_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(
        out,
        "mechanism,epsilon,run,seed,test_accuracy,vulnerability,length,stop_reason,wall_ms"
    )
    .map_err(io)?;
    for r in &result.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.method, r.epsilon, r.run, r.seed, r.test_accuracy, r.vulnerability, r.length, r.stop_reason, r.wall_ms
        )
        .map_err(io)?;
    }
    finish(&mut out, path)
}

pub fn write_aggregate_csv(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "mechanism,epsilon,mean_acc,std_acc,mean_vuln,std_vuln").map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method, r.epsilon, r.mean_acc, r.std_acc, r.mean_vuln, r.std_vuln
        )
        .map_err(io)?;
    }
    finish(&mut out, path)
}

pub fn write_noise_table_csv(rows: &[NoiseScaleRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "n,smooth_scale,global_scale").map_err(io)?;
    for r in rows {
        writeln!(out, "{},{},{}", r.n, r.smooth_scale, r.global_scale).map_err(io)?;
    }
    finish(&mut out, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
        assert!(mean_std(&[]).0.is_nan());
    }
}
