use serde::{Deserialize, Serialize};

use super::{count_macs, count_params, evaluate};
use crate::data::{split_scaled, SeriesDataset, SplitSpec};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::train::{train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lookback: usize,
    pub horizon: usize,
    pub mse: f64,
    pub mae: f64,
    pub param_count: usize,
    pub mac_count: u64,
}

/// Trains and tests one model per lookback in `lookbacks`, keeping every
/// other setting of `base` fixed. Each lookback gets its own split, since
/// validation and test segments carry `L` rows of context.
pub fn lookback_sweep(
    ds: &SeriesDataset,
    spec: &SplitSpec,
    base: &ModelConfig,
    lookbacks: &[usize],
    train_cfg: &TrainConfig,
) -> Result<Vec<SweepRow>> {
    if lookbacks.is_empty() {
        return Err(Error::Config("lookback sweep needs at least one value".into()));
    }
    lookbacks
        .iter()
        .map(|&lookback| {
            let cfg = ModelConfig { lookback, ..base.clone() };
            let (splits, _) = split_scaled(ds, spec, lookback, cfg.horizon)?;
            let out = train(&cfg, &splits.train, &splits.val, train_cfg)?;
            let rep = evaluate(&out.params, &cfg, &splits.test)?;
            Ok(SweepRow {
                lookback,
                horizon: cfg.horizon,
                mse: rep.mse,
                mae: rep.mae,
                param_count: count_params(&cfg),
                mac_count: count_macs(&cfg),
            })
        })
        .collect()
}
