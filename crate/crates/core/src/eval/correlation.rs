use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// A Pearson coefficient. `degenerate` marks a zero-variance input, for
/// which `r` is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pearson {
    pub r: f64,
    pub degenerate: bool,
}

/// Pairwise Pearson coefficients of `n` variables, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub n: usize,
    pub values: Vec<Pearson>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Pearson {
        self.values[i * self.n + j]
    }
}

/// Spread below this fraction of the largest magnitude counts as constant.
const DEGENERATE_REL: f64 = 1e-12;

pub fn pearson(a: &[f64], b: &[f64]) -> Result<Pearson> {
    if a.len() != b.len() {
        return Err(Error::shape("pearson", format!("lengths {} and {}", a.len(), b.len())));
    }
    let n = a.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let flat = |ss: f64, v: &[f64]| {
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        ss.sqrt() <= DEGENERATE_REL * scale * n.sqrt()
    };
    if a.is_empty() || flat(saa, a) || flat(sbb, b) {
        return Ok(Pearson { r: 0.0, degenerate: true });
    }
    let r = (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0);
    Ok(Pearson { r, degenerate: false })
}

fn correlation_matrix(x: &Matrix) -> Result<CorrelationMatrix> {
    let n = x.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| x.column(j)).collect();
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(pearson(&cols[i], &cols[j])?);
        }
    }
    Ok(CorrelationMatrix { n, values })
}

/// Splits the rows of `x` into `segments` consecutive blocks of
/// `floor(L / segments)` rows (the remainder is dropped) and returns the
/// variable correlation matrix of each block.
pub fn segment_correlation(x: &Matrix, segments: usize) -> Result<Vec<CorrelationMatrix>> {
    if segments == 0 || segments > x.rows() {
        return Err(Error::Config(format!(
            "segments must be in 1..={}, got {segments}",
            x.rows()
        )));
    }
    let len = x.rows() / segments;
    (0..segments)
        .map(|s| correlation_matrix(&x.slice_rows(s * len, (s + 1) * len)))
        .collect()
}

/// Pearson coefficient over every length-`window` slice, `len - window + 1`
/// values in total.
pub fn rolling_correlation(a: &[f64], b: &[f64], window: usize) -> Result<Vec<Pearson>> {
    if a.len() != b.len() {
        return Err(Error::shape(
            "rolling correlation",
            format!("lengths {} and {}", a.len(), b.len()),
        ));
    }
    if window < 2 {
        return Err(Error::Config(format!("rolling window must be >= 2, got {window}")));
    }
    if a.len() < window {
        return Err(Error::Data(format!(
            "series of length {} is shorter than the window {window}",
            a.len()
        )));
    }
    (0..=a.len() - window)
        .map(|s| pearson(&a[s..s + window], &b[s..s + window]))
        .collect()
}

/// One row of the long-format correlation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    /// Segment or window index.
    pub index: usize,
    pub i: usize,
    pub j: usize,
    pub r: f64,
    pub degenerate: bool,
}

pub fn segment_records(mats: &[CorrelationMatrix]) -> Vec<CorrelationRecord> {
    let mut out = Vec::new();
    for (index, m) in mats.iter().enumerate() {
        for i in 0..m.n {
            for j in 0..m.n {
                let p = m.get(i, j);
                out.push(CorrelationRecord { index, i, j, r: p.r, degenerate: p.degenerate });
            }
        }
    }
    out
}

pub fn rolling_records(i: usize, j: usize, values: &[Pearson]) -> Vec<CorrelationRecord> {
    values
        .iter()
        .enumerate()
        .map(|(index, p)| CorrelationRecord { index, i, j, r: p.r, degenerate: p.degenerate })
        .collect()
}

pub fn write_correlation_csv(records: &[CorrelationRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    for rec in records {
        w.serialize(rec).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
