use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{adam_step, AdamState, TrainConfig};
use crate::data::{SeriesDataset, WindowSample, Windows};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::model::{backward, forward, training_loss, training_loss_grad, Gradients, Mode, ModelConfig, TimeCnnParams};
use crate::rng::RngState;

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;
const DROPOUT_STREAM: u64 = 3;

/// One line of the training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mse: f64,
    pub val_mae: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation MSE.
    pub params: TimeCnnParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
}

/// Average of per-sample gradients over `batch`, plus the mean loss.
///
/// Sample `k` draws its dropout masks from `rngs[k]`. Per-sample results are
/// reduced in batch order so the sum does not depend on thread scheduling.
pub fn batch_gradient(
    params: &TimeCnnParams,
    cfg: &ModelConfig,
    batch: &[WindowSample],
    rngs: &[RngState],
) -> Result<(Gradients, f64)> {
    if batch.is_empty() || batch.len() != rngs.len() {
        return Err(Error::shape(
            "batch",
            format!("{} samples, {} rng streams", batch.len(), rngs.len()),
        ));
    }
    let per_sample: Vec<(Gradients, f64)> = batch
        .par_iter()
        .zip(rngs.par_iter())
        .map(|(s, rng)| {
            let mut rng = rng.clone();
            let (yhat, tape) = forward(&s.x, params, cfg, Mode::Train, &mut rng)?;
            let loss = training_loss(&yhat, &s.y)?;
            let g = backward(&tape, params, &training_loss_grad(&yhat, &s.y)?)?;
            Ok((g, loss))
        })
        .collect::<Result<_>>()?;

    let mut total = params.zeros_like();
    let mut loss = 0.0;
    for (g, l) in &per_sample {
        total.add_scaled(g, 1.0)?;
        loss += l;
    }
    let inv = 1.0 / batch.len() as f64;
    total.scale(inv);
    Ok((total, loss * inv))
}

/// Mini-batch Adam with per-epoch validation and early stopping.
///
/// Training stops once more than `patience` consecutive epochs fail to
/// improve the best validation MSE, or after `max_epochs`.
pub fn train(
    model_cfg: &ModelConfig,
    train_ds: &SeriesDataset,
    val_ds: &SeriesDataset,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    model_cfg.validate()?;
    cfg.validate()?;
    let windows = Windows::new(train_ds, model_cfg.lookback, model_cfg.horizon, cfg.train_stride)
        .map_err(|e| Error::Data(format!("training segment: {e}")))?;
    Windows::new(val_ds, model_cfg.lookback, model_cfg.horizon, 1)
        .map_err(|e| Error::Data(format!("validation segment: {e}")))?;

    let root = RngState::new(cfg.seed);
    let mut params = TimeCnnParams::init(model_cfg, &mut root.derive(INIT_STREAM))?;
    let mut adam = AdamState::new(&params);
    let shuffle_root = root.derive(SHUFFLE_STREAM);
    let dropout_root = root.derive(DROPOUT_STREAM);

    let mut best = (f64::INFINITY, params.clone(), 0usize);
    let mut stale = 0usize;
    let mut history = Vec::new();
    let mut global_sample = 0u64;

    for epoch in 0..cfg.max_epochs {
        let lr = cfg.lr_at(epoch);
        let order = windows.shuffled_indices(&mut shuffle_root.derive(epoch as u64));
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<WindowSample> = chunk.iter().map(|&k| windows.get(k)).collect();
            let rngs: Vec<RngState> = (0..chunk.len())
                .map(|i| dropout_root.derive(global_sample + i as u64))
                .collect();
            global_sample += chunk.len() as u64;
            let (grads, loss) = batch_gradient(&params, model_cfg, &batch, &rngs)?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::NonFinite(format!(
                    "training loss {loss} at epoch {epoch}, batch {b}"
                )));
            }
            adam_step(&mut params, &grads, &mut adam, cfg, lr)?;
            loss_sum += loss;
            batches += 1;
        }
        if !params.is_finite() {
            return Err(Error::NonFinite(format!("parameters after epoch {epoch}")));
        }
        let val = evaluate(&params, model_cfg, val_ds)?;
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / batches as f64,
            val_mse: val.mse,
            val_mae: val.mae,
            lr,
        });
        if val.mse < best.0 {
            best = (val.mse, params.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale > cfg.patience {
                break;
            }
        }
    }
    let (best_val_mse, params, best_epoch) = best;
    Ok(TrainOutcome {
        params,
        history,
        best_epoch,
        best_val_mse,
    })
}

pub fn write_history_jsonl(history: &[EpochRecord], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for rec in history {
        serde_json::to_writer(&mut out, rec).map_err(|e| Error::Format(e.to_string()))?;
        out.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_dynamic_corr;
    use crate::numeric::Matrix;

    fn small_cfg(l: usize, t: usize, n: usize) -> ModelConfig {
        let mut cfg = ModelConfig::new(l, t, n);
        cfg.token_dim = 16;
        cfg.hidden_dim = 32;
        cfg.ffn_blocks = 1;
        cfg
    }

    fn series(rows: usize, n: usize, seed: u64) -> SeriesDataset {
        synth_dynamic_corr(rows, n, 40, seed).unwrap()
    }

    #[test]
    fn overfits_single_window() {
        let mut cfg = small_cfg(12, 4, 3);
        cfg.dropout = 0.0;
        let ds = series(16, 3, 1);
        let tc = TrainConfig {
            lr: 3e-3,
            batch_size: 1,
            max_epochs: 500,
            patience: 500,
            lr_decay: 1.0,
            ..Default::default()
        };
        let out = train(&cfg, &ds, &ds, &tc).unwrap();
        let last = out.history.last().unwrap();
        assert!(last.train_loss < 1e-3, "{}", last.train_loss);
    }

    #[test]
    fn batch_gradient_is_mean_of_samples() {
        let cfg = small_cfg(8, 3, 2);
        let ds = series(30, 2, 4);
        let w = Windows::new(&ds, 8, 3, 1).unwrap();
        let params = TimeCnnParams::init(&cfg, &mut RngState::new(2)).unwrap();
        let batch: Vec<_> = (0..4).map(|k| w.get(k * 3)).collect();
        let rngs: Vec<_> = (0..4).map(|k| RngState::new(100 + k)).collect();
        let (g, loss) = batch_gradient(&params, &cfg, &batch, &rngs).unwrap();

        let mut acc = params.zeros_like();
        let mut loss_acc = 0.0;
        for (s, r) in batch.iter().zip(&rngs) {
            let (gi, li) = batch_gradient(&params, &cfg, std::slice::from_ref(s), std::slice::from_ref(r)).unwrap();
            acc.add_scaled(&gi, 0.25).unwrap();
            loss_acc += li / 4.0;
        }
        for (a, b) in g.to_flat().iter().zip(acc.to_flat()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        assert!((loss - loss_acc).abs() < 1e-12);
    }

    #[test]
    fn zero_patience_stops_after_first_non_improving_epoch() {
        let cfg = small_cfg(8, 2, 2);
        let ds = series(60, 2, 7);
        // A huge learning rate makes validation get worse quickly.
        let tc = TrainConfig {
            lr: 0.5,
            patience: 0,
            max_epochs: 20,
            batch_size: 8,
            ..Default::default()
        };
        let out = train(&cfg, &ds, &ds, &tc).unwrap();
        let h = &out.history;
        let first_bad = (1..h.len())
            .find(|&e| h[e].val_mse >= h[..e].iter().map(|r| r.val_mse).fold(f64::INFINITY, f64::min));
        match first_bad {
            Some(e) => assert_eq!(h.len(), e + 1),
            None => assert_eq!(h.len(), 20),
        }
    }

    #[test]
    fn best_params_are_never_worse_than_any_epoch() {
        let cfg = small_cfg(8, 2, 2);
        let ds = series(80, 2, 9);
        let tc = TrainConfig { max_epochs: 6, batch_size: 8, lr: 0.05, ..Default::default() };
        let out = train(&cfg, &ds, &ds, &tc).unwrap();
        let min = out.history.iter().map(|r| r.val_mse).fold(f64::INFINITY, f64::min);
        assert_eq!(out.best_val_mse, min);
        assert_eq!(evaluate(&out.params, &cfg, &ds).unwrap().mse, min);
    }

    #[test]
    fn identical_seed_gives_identical_history() {
        let cfg = small_cfg(8, 2, 3);
        let ds = series(70, 3, 3);
        let tc = TrainConfig { max_epochs: 3, batch_size: 5, ..Default::default() };
        let a = train(&cfg, &ds, &ds, &tc).unwrap();
        let b = train(&cfg, &ds, &ds, &tc).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.params, b.params);
        let c = train(&cfg, &ds, &ds, &TrainConfig { seed: 7, ..tc }).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn non_finite_data_aborts() {
        let cfg = small_cfg(4, 2, 2);
        // Finite inputs whose squared error overflows.
        let values = Matrix::from_fn(20, 2, |i, j| if (i + j) % 2 == 0 { 1e200 } else { -1e200 });
        let ds = SeriesDataset::new("bad", values, vec!["a".into(), "b".into()]).unwrap();
        let err = train(&cfg, &ds, &ds, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)), "{err}");
    }

    #[test]
    fn history_jsonl_has_one_line_per_epoch() {
        let h = vec![
            EpochRecord { epoch: 0, train_loss: 1.0, val_mse: 0.5, val_mae: 0.4, lr: 1e-3 },
            EpochRecord { epoch: 1, train_loss: 0.8, val_mse: 0.45, val_mae: 0.39, lr: 9e-4 },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.jsonl");
        write_history_jsonl(&h, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: Vec<EpochRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, h);
    }
}
