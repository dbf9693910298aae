//! Synthetic series whose cross-variable correlations change sign over time.
//!
//! Variable 0 is a driver: a daily-style sinusoid plus an AR(1) component.
//! Every other variable is `s_j(t) * driver(t) + noise`, where the sign
//! `s_j` flips every `regime_length` steps on a per-variable phase, so a
//! lookback window generally holds both positive and negative correlation.

use super::SeriesDataset;
use crate::error::{Error, Result};
use crate::numeric::Matrix;
use crate::rng::RngState;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub rows: usize,
    pub num_variables: usize,
    pub regime_length: usize,
    /// Standard deviation of the per-variable observation noise.
    pub noise: f64,
    pub period: usize,
    pub ar_coef: f64,
    pub ar_scale: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(rows: usize, num_variables: usize, regime_length: usize, seed: u64) -> Self {
        Self {
            rows,
            num_variables,
            regime_length,
            noise: 0.1,
            period: 24,
            ar_coef: 0.9,
            ar_scale: 0.3,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_variables < 2 {
            return Err(Error::Config("synthetic data needs at least 2 variables".into()));
        }
        if self.regime_length == 0 || self.period == 0 || self.rows == 0 {
            return Err(Error::Config(
                "rows, regime_length and period must be >= 1".into(),
            ));
        }
        if !(self.noise >= 0.0) || !(self.ar_scale >= 0.0) {
            return Err(Error::Config("noise scales must be >= 0".into()));
        }
        Ok(())
    }

    /// Correlation sign of each variable with the driver, `rows x N`
    /// (column 0 is all ones).
    pub fn signs(&self) -> Result<Matrix> {
        self.validate()?;
        let mut rng = RngState::new(self.seed).derive(1);
        let schedule: Vec<(usize, f64)> = (1..self.num_variables)
            .map(|_| {
                let phase = rng.below(self.regime_length);
                let start = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
                (phase, start)
            })
            .collect();
        Ok(Matrix::from_fn(self.rows, self.num_variables, |t, j| {
            if j == 0 {
                return 1.0;
            }
            let (phase, start) = schedule[j - 1];
            if ((t + phase) / self.regime_length) % 2 == 0 {
                start
            } else {
                -start
            }
        }))
    }

    pub fn generate(&self) -> Result<SeriesDataset> {
        let signs = self.signs()?;
        let mut rng = RngState::new(self.seed).derive(2);
        let mut ar = 0.0;
        let tau = std::f64::consts::TAU;
        let mut values = Matrix::zeros(self.rows, self.num_variables);
        for t in 0..self.rows {
            ar = self.ar_coef * ar + self.ar_scale * rng.normal();
            let driver = (tau * t as f64 / self.period as f64).sin() + ar;
            values.set(t, 0, driver);
            for j in 1..self.num_variables {
                let v = signs.get(t, j) * driver + self.noise * rng.normal();
                values.set(t, j, v);
            }
        }
        let names = std::iter::once("driver".to_owned())
            .chain((1..self.num_variables).map(|j| format!("v{j}")))
            .collect();
        let mut ds = SeriesDataset::new("synthetic", values, names)?;
        ds.frequency = Some("1 step".into());
        Ok(ds)
    }
}

pub fn synth_dynamic_corr(
    rows: usize,
    num_variables: usize,
    regime_length: usize,
    seed: u64,
) -> Result<SeriesDataset> {
    SynthConfig::new(rows, num_variables, regime_length, seed).generate()
}
