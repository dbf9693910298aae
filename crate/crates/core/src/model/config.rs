use serde::{Deserialize, Serialize};

use crate::crosscnn::{KernelInit, MixerKind};
use crate::error::{Error, Result};

/// Shape and regularization settings of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub lookback: usize,
    pub horizon: usize,
    pub num_variables: usize,
    pub token_dim: usize,
    pub hidden_dim: usize,
    pub ffn_blocks: usize,
    pub dropout: f64,
    pub ln_eps: f64,
    pub instance_norm_eps: f64,
    #[serde(with = "mixer_name")]
    pub mixer: MixerKind,
    pub use_instance_norm: bool,
    #[serde(with = "init_name")]
    pub kernel_init: KernelInit,
}

impl ModelConfig {
    /// Default widths (D=256, H=512, M=2, dropout 0.1) for the given shapes.
    pub fn new(lookback: usize, horizon: usize, num_variables: usize) -> Self {
        Self {
            lookback,
            horizon,
            num_variables,
            token_dim: 256,
            hidden_dim: 512,
            ffn_blocks: 2,
            dropout: 0.1,
            ln_eps: 1e-5,
            instance_norm_eps: 1e-5,
            mixer: MixerKind::CrossCnn,
            use_instance_norm: true,
            kernel_init: KernelInit::SmallUniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("lookback", self.lookback),
            ("horizon", self.horizon),
            ("num_variables", self.num_variables),
            ("token_dim", self.token_dim),
            ("hidden_dim", self.hidden_dim),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if !(self.ln_eps > 0.0) || !(self.instance_norm_eps > 0.0) {
            return Err(Error::Config("eps values must be > 0".into()));
        }
        self.mixer.validate()
    }
}

mod mixer_name {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::crosscnn::MixerKind;

    pub fn serialize<S: Serializer>(kind: &MixerKind, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(kind)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MixerKind, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

mod init_name {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::crosscnn::KernelInit;

    pub fn serialize<S: Serializer>(init: &KernelInit, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(init)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<KernelInit, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let cfg = ModelConfig::new(96, 96, 7);
        cfg.validate().unwrap();
        let mut bad = cfg.clone();
        bad.horizon = 0;
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.dropout = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.ln_eps = 0.0;
        assert!(bad.validate().is_err());
        let mut ok = cfg;
        ok.ffn_blocks = 0;
        ok.validate().unwrap();
    }
}
