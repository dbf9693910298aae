use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Non-improving epochs tolerated before stopping.
    pub patience: usize,
    /// Multiplicative learning-rate factor applied once per epoch.
    pub lr_decay: f64,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Spacing between training window origins. 1 uses every window.
    pub train_stride: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            batch_size: 32,
            max_epochs: 30,
            patience: 5,
            lr_decay: 0.9,
            seed: 2023,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            train_stride: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("train.lr must be > 0, got {}", self.lr));
        }
        if self.batch_size == 0 {
            return bad("train.batch_size must be >= 1".into());
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad(format!("train.lr_decay must be in (0, 1], got {}", self.lr_decay));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("train.adam_beta1 and train.adam_beta2 must be in [0, 1)".into());
        }
        if !(self.adam_eps > 0.0) {
            return bad("train.adam_eps must be > 0".into());
        }
        if self.train_stride == 0 {
            return bad("train.train_stride must be >= 1".into());
        }
        Ok(())
    }

    /// Learning rate used throughout epoch `epoch` (0-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr * self.lr_decay.powi(epoch as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TrainConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_values_rejected() {
        for edit in [
            |c: &mut TrainConfig| c.lr = 0.0,
            |c: &mut TrainConfig| c.batch_size = 0,
            |c: &mut TrainConfig| c.lr_decay = 0.0,
            |c: &mut TrainConfig| c.lr_decay = 1.5,
            |c: &mut TrainConfig| c.adam_beta2 = 1.0,
            |c: &mut TrainConfig| c.train_stride = 0,
        ] {
            let mut c = TrainConfig::default();
            edit(&mut c);
            assert!(matches!(c.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn decay_schedule() {
        let c = TrainConfig { lr: 0.01, lr_decay: 0.5, ..Default::default() };
        assert_eq!(c.lr_at(0), 0.01);
        assert_eq!(c.lr_at(2), 0.0025);
    }
}
