use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{SeriesDataset, Windows};
use crate::error::{Error, Result};
use crate::model::{predict, ModelConfig, TimeCnnParams};
use crate::numeric::Matrix;

/// Per-element error statistics over every window of a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: f64,
    pub mae: f64,
    pub n_windows: usize,
    /// MSE at each horizon step, averaged over windows and variables.
    pub per_horizon_mse: Vec<f64>,
    /// MSE and MAE of each variable, averaged over windows and steps.
    pub per_variable_mse: Vec<f64>,
    pub per_variable_mae: Vec<f64>,
}

struct WindowErrors {
    sq: Vec<f64>,
    abs: Vec<f64>,
}

/// Eval-mode forecasts for every stride-1 window of `ds`, scored against
/// the true horizon.
pub fn evaluate(params: &TimeCnnParams, cfg: &ModelConfig, ds: &SeriesDataset) -> Result<MetricReport> {
    if ds.num_variables() != cfg.num_variables {
        return Err(Error::shape(
            "evaluate",
            format!("dataset has {} variables, model {}", ds.num_variables(), cfg.num_variables),
        ));
    }
    evaluate_with(ds, cfg.lookback, cfg.horizon, |x| predict(x, params, cfg))
}

/// Eval-mode forecasts from windows of `inputs`, scored against the
/// horizon rows of `targets`. Used to perturb inputs while keeping the
/// ground truth clean.
pub fn evaluate_inputs(
    params: &TimeCnnParams,
    cfg: &ModelConfig,
    inputs: &SeriesDataset,
    targets: &SeriesDataset,
) -> Result<MetricReport> {
    if inputs.values.shape() != targets.values.shape() || inputs.num_variables() != cfg.num_variables {
        return Err(Error::shape(
            "evaluate",
            format!(
                "inputs {:?}, targets {:?}, model has {} variables",
                inputs.values.shape(),
                targets.values.shape(),
                cfg.num_variables
            ),
        ));
    }
    score(inputs, targets, cfg.lookback, cfg.horizon, |x| predict(x, params, cfg))
}

/// Scores an arbitrary forecaster over every stride-1 window of `ds`.
/// Per-window errors are summed in window order.
pub fn evaluate_with<F>(ds: &SeriesDataset, lookback: usize, horizon: usize, forecast: F) -> Result<MetricReport>
where
    F: Fn(&Matrix) -> Result<Matrix> + Sync,
{
    score(ds, ds, lookback, horizon, forecast)
}

fn score<F>(
    inputs: &SeriesDataset,
    targets: &SeriesDataset,
    lookback: usize,
    horizon: usize,
    forecast: F,
) -> Result<MetricReport>
where
    F: Fn(&Matrix) -> Result<Matrix> + Sync,
{
    let windows = Windows::new(targets, lookback, horizon, 1)
        .map_err(|e| Error::Data(format!("empty evaluation set: {e}")))?;
    let input_windows = Windows::new(inputs, lookback, horizon, 1)?;
    let per_window: Vec<WindowErrors> = (0..windows.len())
        .into_par_iter()
        .map(|k| {
            let s = windows.get(k);
            let yhat = forecast(&input_windows.get(k).x)?;
            let diff = yhat.sub(&s.y)?;
            Ok(WindowErrors {
                sq: diff.data().iter().map(|d| d * d).collect(),
                abs: diff.data().iter().map(|d| d.abs()).collect(),
            })
        })
        .collect::<Result<_>>()?;

    let (t, n) = (horizon, targets.num_variables());
    let mut sq = vec![0.0; t * n];
    let mut abs = vec![0.0; t * n];
    for w in &per_window {
        for (a, b) in sq.iter_mut().zip(&w.sq) {
            *a += b;
        }
        for (a, b) in abs.iter_mut().zip(&w.abs) {
            *a += b;
        }
    }
    let count = per_window.len() as f64;
    let per_horizon_mse = (0..t)
        .map(|h| sq[h * n..(h + 1) * n].iter().sum::<f64>() / (count * n as f64))
        .collect();
    let per_variable = |acc: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| (0..t).map(|h| acc[h * n + j]).sum::<f64>() / (count * t as f64))
            .collect()
    };
    let total = count * (t * n) as f64;
    Ok(MetricReport {
        mse: sq.iter().sum::<f64>() / total,
        mae: abs.iter().sum::<f64>() / total,
        n_windows: per_window.len(),
        per_horizon_mse,
        per_variable_mse: per_variable(&sq),
        per_variable_mae: per_variable(&abs),
    })
}
