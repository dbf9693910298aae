use super::SeriesDataset;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

const STD_FLOOR: f64 = 1e-8;

/// Per-variable z-score statistics fitted on the training segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_scaler(train: &SeriesDataset) -> Result<Scaler> {
    let rows = train.rows();
    if rows == 0 {
        return Err(Error::Data("cannot fit scaler on an empty segment".into()));
    }
    let n = train.num_variables();
    let mut mean = vec![0.0; n];
    for i in 0..rows {
        for (m, v) in mean.iter_mut().zip(train.values.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let mut var = vec![0.0; n];
    for i in 0..rows {
        for ((s, v), m) in var.iter_mut().zip(train.values.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var
        .into_iter()
        .map(|s| (s / rows as f64).sqrt().max(STD_FLOOR))
        .collect();
    Ok(Scaler { mean, std })
}

impl Scaler {
    fn check(&self, ds: &SeriesDataset) -> Result<()> {
        if ds.num_variables() != self.mean.len() {
            return Err(Error::Data(format!(
                "scaler fitted on {} variables, dataset has {}",
                self.mean.len(),
                ds.num_variables()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, ds: &SeriesDataset) -> Result<SeriesDataset> {
        self.check(ds)?;
        let v = &ds.values;
        Ok(ds.with_values(Matrix::from_fn(v.rows(), v.cols(), |i, j| {
            (v.get(i, j) - self.mean[j]) / self.std[j]
        })))
    }

    pub fn invert(&self, ds: &SeriesDataset) -> Result<SeriesDataset> {
        self.check(ds)?;
        let v = &ds.values;
        Ok(ds.with_values(Matrix::from_fn(v.rows(), v.cols(), |i, j| {
            v.get(i, j) * self.std[j] + self.mean[j]
        })))
    }
}
