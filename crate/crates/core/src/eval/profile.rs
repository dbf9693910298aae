use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{predict, ModelConfig, TimeCnnParams};
use crate::numeric::{mac, Matrix};
use crate::rng::RngState;

/// Trainable parameter count from the configuration alone.
pub fn count_params(cfg: &ModelConfig) -> usize {
    let (l, n, d, h, t, m) = (
        cfg.lookback,
        cfg.num_variables,
        cfg.token_dim,
        cfg.hidden_dim,
        cfg.horizon,
        cfg.ffn_blocks,
    );
    cfg.mixer.param_count(l, n)
        + (l * d + d)
        + m * (2 * d + d * h + h + h * d + d)
        + 2 * d
        + (d * t + t)
}

/// Multiply-accumulates of one forward pass on a single window. Norms,
/// activations and element-wise adds are not counted.
pub fn count_macs(cfg: &ModelConfig) -> u64 {
    let (l, n, d, h, t, m) = (
        cfg.lookback as u64,
        cfg.num_variables as u64,
        cfg.token_dim as u64,
        cfg.hidden_dim as u64,
        cfg.horizon as u64,
        cfg.ffn_blocks as u64,
    );
    cfg.mixer.macs(cfg.lookback, cfg.num_variables) + n * l * d + m * n * (d * h + h * d) + n * d * t
}

/// Multiply-accumulates actually executed by an eval-mode forward on `x`.
pub fn instrumented_macs(params: &TimeCnnParams, cfg: &ModelConfig, x: &Matrix) -> Result<u64> {
    let (res, macs) = mac::counting(|| predict(x, params, cfg));
    res?;
    Ok(macs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub std_ms: f64,
    pub p50_ms: f64,
    pub p99_ms: f64,
}

impl TimingStats {
    /// Summary of per-call durations; std is the sample std (0 for one call)
    /// and percentiles use the nearest-rank rule.
    pub fn from_samples(samples_ms: &[f64]) -> Result<Self> {
        if samples_ms.is_empty() {
            return Err(Error::Config("no timing samples".into()));
        }
        let (mean_ms, std_ms) = crate::train::mean_std(samples_ms);
        let mut sorted = samples_ms.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |q: f64| {
            let k = (q * sorted.len() as f64).ceil() as usize;
            sorted[k.clamp(1, sorted.len()) - 1]
        };
        Ok(Self {
            mean_ms,
            std_ms,
            p50_ms: rank(0.5),
            p99_ms: rank(0.99),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub param_count: usize,
    pub mac_count: u64,
    pub warmup_iters: usize,
    pub timed_iters: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub p50_ms: f64,
    pub p99_ms: f64,
}

/// Times `trials` eval-mode forwards on one fixed random input after
/// `warmup` untimed calls. Also returns the forecast, which is identical
/// on every call.
pub fn time_inference(
    params: &TimeCnnParams,
    cfg: &ModelConfig,
    warmup: usize,
    trials: usize,
    input_seed: u64,
) -> Result<(ProfileReport, Matrix)> {
    if warmup == 0 || trials == 0 {
        return Err(Error::Config("warmup and trials must be >= 1".into()));
    }
    let mut rng = RngState::new(input_seed);
    let x = Matrix::from_fn(cfg.lookback, cfg.num_variables, |_, _| rng.normal());
    let mut out = predict(&x, params, cfg)?;
    for _ in 1..warmup {
        out = predict(&x, params, cfg)?;
    }
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let start = Instant::now();
        let y = predict(&x, params, cfg)?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
        if y != out {
            return Err(Error::NonFinite("forecast changed between identical calls".into()));
        }
    }
    let stats = TimingStats::from_samples(&samples)?;
    Ok((
        ProfileReport {
            param_count: count_params(cfg),
            mac_count: count_macs(cfg),
            warmup_iters: warmup,
            timed_iters: trials,
            mean_ms: stats.mean_ms,
            std_ms: stats.std_ms,
            p50_ms: stats.p50_ms,
            p99_ms: stats.p99_ms,
        },
        out,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crosscnn::MixerKind;

    const MIXERS: [MixerKind; 6] = [
        MixerKind::CrossCnn,
        MixerKind::OneCnn,
        MixerKind::CrossLinear,
        MixerKind::TwoDCnn(3),
        MixerKind::TwoDCnn(7),
        MixerKind::None,
    ];

    fn random_cfg(rng: &mut RngState) -> ModelConfig {
        let mut cfg = ModelConfig::new(1 + rng.below(12), 1 + rng.below(6), 1 + rng.below(6));
        cfg.token_dim = 1 + rng.below(8);
        cfg.hidden_dim = 1 + rng.below(8);
        cfg.ffn_blocks = rng.below(4);
        cfg.mixer = MIXERS[rng.below(MIXERS.len())];
        cfg
    }

    #[test]
    fn closed_form_params_match_structure() {
        let mut rng = RngState::new(4);
        for _ in 0..100 {
            let cfg = random_cfg(&mut rng);
            let p = TimeCnnParams::init(&cfg, &mut rng).unwrap();
            assert_eq!(count_params(&cfg), p.param_count(), "{cfg:?}");
        }
    }

    #[test]
    fn tiny_config_by_hand() {
        let mut cfg = ModelConfig::new(4, 2, 2);
        cfg.token_dim = 3;
        cfg.hidden_dim = 5;
        cfg.ffn_blocks = 1;
        // mixer 8, embed 15, block 6+15+5+15+3, final norm 6, projection 8.
        assert_eq!(count_params(&cfg), 8 + 15 + 44 + 6 + 8);
        let p = TimeCnnParams::init(&cfg, &mut RngState::new(0)).unwrap();
        let structural: usize = p.tensors().iter().map(|t| t.iter().count()).sum();
        assert_eq!(structural, count_params(&cfg));
    }

    #[test]
    fn mixer_terms() {
        let mut cfg = ModelConfig::new(96, 96, 7);
        let with = (count_params(&cfg), count_macs(&cfg));
        assert_eq!(cfg.mixer.param_count(96, 7), 672);
        assert_eq!(cfg.mixer.macs(96, 7), 4704);
        cfg.mixer = MixerKind::None;
        assert_eq!(with.0 - count_params(&cfg), 96 * 7);
        assert_eq!(with.1 - count_macs(&cfg), 96 * 49);
    }

    #[test]
    fn closed_form_macs_match_instrumented_forward() {
        let mut rng = RngState::new(6);
        for _ in 0..20 {
            let cfg = random_cfg(&mut rng);
            let p = TimeCnnParams::init(&cfg, &mut rng).unwrap();
            let x = Matrix::from_fn(cfg.lookback, cfg.num_variables, |_, _| rng.normal());
            assert_eq!(instrumented_macs(&p, &cfg, &x).unwrap(), count_macs(&cfg), "{cfg:?}");
        }
    }

    #[test]
    fn single_trial_has_zero_std() {
        let mut cfg = ModelConfig::new(8, 2, 3);
        cfg.token_dim = 4;
        cfg.hidden_dim = 4;
        let p = TimeCnnParams::init(&cfg, &mut RngState::new(1)).unwrap();
        let (rep, out) = time_inference(&p, &cfg, 2, 1, 9).unwrap();
        assert_eq!(rep.std_ms, 0.0);
        assert_eq!(rep.timed_iters, 1);
        assert_eq!(rep.param_count, p.param_count());
        let (_, again) = time_inference(&p, &cfg, 1, 3, 9).unwrap();
        assert_eq!(out, again);
        assert!(time_inference(&p, &cfg, 0, 1, 9).is_err());
    }

    #[test]
    fn percentiles_nearest_rank() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        let t = TimingStats::from_samples(&s).unwrap();
        assert_eq!((t.p50_ms, t.p99_ms, t.mean_ms), (50.0, 99.0, 50.5));
    }
}
