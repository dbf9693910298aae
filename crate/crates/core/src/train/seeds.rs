use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, EpochRecord, TrainConfig};
use crate::data::Splits;
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricReport};
use crate::model::ModelConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub best_epoch: usize,
    pub test: MetricReport,
    pub history: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSeedReport {
    pub runs: Vec<SeedRun>,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
}

impl MultiSeedReport {
    /// `("0.140±0.000", "0.262±0.001")` style summary.
    pub fn summary(&self, decimals: usize) -> (String, String) {
        (
            format_mean_std(self.mse_mean, self.mse_std, decimals),
            format_mean_std(self.mae_mean, self.mae_std, decimals),
        )
    }
}

/// Mean and sample standard deviation (`n - 1`). A single value, or all
/// values equal, gives exactly `(value, 0)`.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|v| *v == values[0]) {
        return (values[0], 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn format_mean_std(mean: f64, std: f64, decimals: usize) -> String {
    format!("{mean:.decimals$}±{std:.decimals$}")
}

/// Trains one independent model per seed and scores each on the test split.
/// Runs are returned in the order of `seeds`.
pub fn multi_seed_run(
    model_cfg: &ModelConfig,
    splits: &Splits,
    train_cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<MultiSeedReport> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = TrainConfig { seed, ..train_cfg.clone() };
            let out = train(model_cfg, &splits.train, &splits.val, &cfg)?;
            Ok(SeedRun {
                seed,
                best_epoch: out.best_epoch,
                test: evaluate(&out.params, model_cfg, &splits.test)?,
                history: out.history,
            })
        })
        .collect::<Result<_>>()?;
    let (mse_mean, mse_std) = mean_std(&runs.iter().map(|r| r.test.mse).collect::<Vec<_>>());
    let (mae_mean, mae_std) = mean_std(&runs.iter().map(|r| r.test.mae).collect::<Vec<_>>());
    Ok(MultiSeedReport {
        runs,
        mse_mean,
        mse_std,
        mae_mean,
        mae_std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split, synth_dynamic_corr, SplitSpec};

    #[test]
    fn mean_std_cases() {
        assert_eq!(mean_std(&[0.3]), (0.3, 0.0));
        assert_eq!(mean_std(&[0.2, 0.2, 0.2]).1, 0.0);
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(format_mean_std(0.14, 0.0001, 3), "0.140±0.000");
    }

    fn setup() -> (ModelConfig, Splits, TrainConfig) {
        let ds = synth_dynamic_corr(1000, 3, 50, 5).unwrap();
        let mut cfg = ModelConfig::new(16, 4, 3);
        cfg.token_dim = 16;
        cfg.hidden_dim = 32;
        cfg.ffn_blocks = 1;
        let splits = split(&ds, &SplitSpec::ratios(0.7, 0.1, 0.2).unwrap(), 16, 4).unwrap();
        let tc = TrainConfig { max_epochs: 8, batch_size: 16, lr: 3e-3, ..Default::default() };
        (cfg, splits, tc)
    }

    #[test]
    fn repeated_seed_has_zero_std() {
        let (cfg, splits, tc) = setup();
        let rep = multi_seed_run(&cfg, &splits, &tc, &[11, 11]).unwrap();
        assert_eq!(rep.mse_std, 0.0);
        assert_eq!(rep.runs[0], rep.runs[1]);
        let single = multi_seed_run(&cfg, &splits, &tc, &[11]).unwrap();
        assert_eq!(single.mse_std, 0.0);
        assert_eq!(single.mse_mean, rep.mse_mean);
    }

    #[test]
    fn three_seeds_are_stable() {
        let (cfg, splits, tc) = setup();
        let rep = multi_seed_run(&cfg, &splits, &tc, &[2021, 2022, 2023]).unwrap();
        assert!(rep.mse_std / rep.mse_mean < 0.1, "{} / {}", rep.mse_std, rep.mse_mean);
    }

    #[test]
    fn empty_seed_list_rejected() {
        let (cfg, splits, tc) = setup();
        assert!(matches!(multi_seed_run(&cfg, &splits, &tc, &[]), Err(Error::Config(_))));
    }
}
