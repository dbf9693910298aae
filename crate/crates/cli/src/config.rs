//! Run configuration: a TOML file with one section per concern, plus
//! `--set section.key=value` overrides applied before validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use timecnn_core::crosscnn::{KernelInit, MixerKind};
use timecnn_core::data::{preset, SplitSpec, SynthConfig};
use timecnn_core::model::ModelConfig;
use timecnn_core::train::TrainConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub ablate: AblateSection,
    #[serde(default)]
    pub correlate: CorrelateSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

/// Where the series comes from and how it is split. Exactly one of `path`
/// and `synthetic` must be set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// CSV file; relative paths resolve against the config file's folder.
    pub path: Option<PathBuf>,
    /// Benchmark layout (split, date column, variable count check).
    pub preset: Option<String>,
    pub synthetic: Option<SynthSection>,
    pub has_date_column: Option<bool>,
    /// `"ratios"`, `"ett-hourly"` or `"ett-minute"`.
    pub split: Option<String>,
    /// Train, validation, test fractions when `split = "ratios"`.
    pub ratios: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub rows: usize,
    pub num_variables: usize,
    pub regime_length: usize,
    pub noise: f64,
    pub period: usize,
    pub ar_coef: f64,
    pub ar_scale: f64,
    pub seed: u64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let c = SynthConfig::new(6000, 8, 48, 0);
        Self {
            rows: c.rows,
            num_variables: c.num_variables,
            regime_length: c.regime_length,
            noise: c.noise,
            period: c.period,
            ar_coef: c.ar_coef,
            ar_scale: c.ar_scale,
            seed: c.seed,
        }
    }
}

impl SynthSection {
    pub fn to_config(&self) -> SynthConfig {
        SynthConfig {
            rows: self.rows,
            num_variables: self.num_variables,
            regime_length: self.regime_length,
            noise: self.noise,
            period: self.period,
            ar_coef: self.ar_coef,
            ar_scale: self.ar_scale,
            seed: self.seed,
        }
    }
}

/// Model settings; the variable count comes from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub lookback: usize,
    pub horizon: usize,
    pub token_dim: usize,
    pub hidden_dim: usize,
    pub ffn_blocks: usize,
    pub dropout: f64,
    pub ln_eps: f64,
    pub instance_norm_eps: f64,
    pub mixer: String,
    pub use_instance_norm: bool,
    pub kernel_init: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelConfig::new(96, 96, 1);
        Self {
            lookback: m.lookback,
            horizon: m.horizon,
            token_dim: m.token_dim,
            hidden_dim: m.hidden_dim,
            ffn_blocks: m.ffn_blocks,
            dropout: m.dropout,
            ln_eps: m.ln_eps,
            instance_norm_eps: m.instance_norm_eps,
            mixer: m.mixer.to_string(),
            use_instance_norm: m.use_instance_norm,
            kernel_init: m.kernel_init.to_string(),
        }
    }
}

impl ModelSection {
    pub fn to_model_config(&self, num_variables: usize) -> CliResult<ModelConfig> {
        let mixer: MixerKind = self.mixer.parse()?;
        let kernel_init: KernelInit = self.kernel_init.parse()?;
        let cfg = ModelConfig {
            lookback: self.lookback,
            horizon: self.horizon,
            num_variables,
            token_dim: self.token_dim,
            hidden_dim: self.hidden_dim,
            ffn_blocks: self.ffn_blocks,
            dropout: self.dropout,
            ln_eps: self.ln_eps,
            instance_norm_eps: self.instance_norm_eps,
            mixer,
            use_instance_norm: self.use_instance_norm,
            kernel_init,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Output directory; `--out` takes precedence.
    pub out_dir: Option<PathBuf>,
    /// Seeds for `train`; when empty, `train.seed` is used alone.
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Checkpoint to score; defaults to `checkpoint.bin` in the output dir.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub warmup: usize,
    pub trials: usize,
    pub input_seed: u64,
    pub checkpoint: Option<PathBuf>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            warmup: 300,
            trials: 10_000,
            input_seed: 0,
            checkpoint: None,
        }
    }
}

pub const ABLATION_VARIANTS: [&str; 6] = ["crosscnn", "onecnn", "crosslinear", "cnn2d_3", "cnn2d_7", "none"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateSection {
    pub variants: Vec<String>,
}

impl Default for AblateSection {
    fn default() -> Self {
        Self {
            variants: ABLATION_VARIANTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateSection {
    /// `"segments"` or `"rolling"`.
    pub mode: String,
    /// First row of the analysed slice (raw series).
    pub start: usize,
    /// Slice length; defaults to the model lookback.
    pub length: Option<usize>,
    pub segments: usize,
    pub window: usize,
    /// Variable pairs for rolling mode; empty means every pair `i < j`.
    pub pairs: Vec<[usize; 2]>,
}

impl Default for CorrelateSection {
    fn default() -> Self {
        Self {
            mode: "segments".into(),
            start: 0,
            length: None,
            segments: 4,
            window: 4,
            pairs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub variable: usize,
    pub sigmas: Vec<f64>,
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            variable: 0,
            sigmas: vec![0.0, 0.5, 1.0, 2.0, 4.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub lookbacks: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            lookbacks: vec![48, 96, 192, 336, 720],
        }
    }
}

/// A parsed config together with the folder relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

pub fn load_config(path: &Path, overrides: &[String]) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse_config(&text, overrides)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}

/// Parses TOML text, applies `key=value` overrides and validates.
pub fn parse_config(text: &str, overrides: &[String]) -> CliResult<RunConfig> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("TOML: {e}")))?;
    for ov in overrides {
        apply_override(&mut table, ov)?;
    }
    let config: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Sets `a.b.c = value`, creating intermediate tables. The value is read
/// as a TOML literal when possible and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> CliResult<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("bad override key '{key}'")));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));

    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("non-empty key");
    let mut cur = table;
    for part in path {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override '{key}': '{part}' is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        match (&self.data.path, &self.data.synthetic) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("set only one of data.path and data.synthetic".into()))
            }
            (None, None) => return Err(CliError::Config("set data.path or data.synthetic".into())),
            _ => {}
        }
        if let Some(name) = &self.data.preset {
            if preset(name).is_none() {
                return Err(CliError::Config(format!("unknown dataset preset '{name}'")));
            }
        }
        self.split_spec()?.validate()?;
        // Shapes are checked again once the variable count is known.
        self.model.to_model_config(1)?;
        self.train.validate()?;
        for v in &self.ablate.variants {
            let kind: MixerKind = v.parse()?;
            if !ABLATION_VARIANTS.contains(&kind.to_string().as_str()) {
                return Err(CliError::Config(format!("unsupported ablation variant '{v}'")));
            }
        }
        if !matches!(self.correlate.mode.as_str(), "segments" | "rolling") {
            return Err(CliError::Config(format!(
                "correlate.mode must be 'segments' or 'rolling', got '{}'",
                self.correlate.mode
            )));
        }
        if self.profile.warmup == 0 || self.profile.trials == 0 {
            return Err(CliError::Config("profile.warmup and profile.trials must be >= 1".into()));
        }
        if self.noise.sigmas.iter().any(|s| !(*s >= 0.0)) {
            return Err(CliError::Config("noise.sigmas must all be >= 0".into()));
        }
        if let Some(s) = &self.data.synthetic {
            if s.num_variables < 2 || s.rows == 0 || s.regime_length == 0 || s.period == 0 {
                return Err(CliError::Config(
                    "data.synthetic needs num_variables >= 2 and positive rows, regime_length, period".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn split_spec(&self) -> CliResult<SplitSpec> {
        let from_preset = self.data.preset.as_deref().and_then(preset).map(|p| p.split);
        let spec = match self.data.split.as_deref() {
            Some("ratios") => {
                let [t, v, s] = self.data.ratios.unwrap_or([0.7, 0.1, 0.2]);
                SplitSpec::ratios(t, v, s)?
            }
            Some("ett-hourly") => SplitSpec::ett_hourly(),
            Some("ett-minute") => SplitSpec::ett_minute(),
            Some(other) => return Err(CliError::Config(format!("unknown split '{other}'"))),
            None => match (self.data.ratios, from_preset) {
                (Some([t, v, s]), _) => SplitSpec::ratios(t, v, s)?,
                (None, Some(spec)) => spec,
                (None, None) => SplitSpec::ratios(0.7, 0.1, 0.2)?,
            },
        };
        Ok(spec)
    }

    pub fn has_date_column(&self) -> bool {
        self.data
            .has_date_column
            .or_else(|| self.data.preset.as_deref().and_then(preset).map(|p| p.has_date_column))
            .unwrap_or(true)
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.run.seeds.is_empty() {
            vec![self.train.seed]
        } else {
            self.run.seeds.clone()
        }
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[data]\npath = \"series.csv\"\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = parse_config(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.train, TrainConfig::default());
        assert_eq!(cfg.model.lookback, 96);
        assert_eq!(cfg.model.mixer, "crosscnn");
        assert_eq!(cfg.seeds(), vec![2023]);
        assert_eq!(cfg.split_spec().unwrap(), SplitSpec::ratios(0.7, 0.1, 0.2).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "[data]\npath = \"a.csv\"\nbogus = 1\n",
            "[data]\npath = \"a.csv\"\n[model]\nwidth = 3\n",
            "[data]\npath = \"a.csv\"\n[extra]\n",
        ] {
            assert!(matches!(parse_config(text, &[]), Err(CliError::Config(_))), "{text}");
        }
        assert!(parse_config(MINIMAL, &["model.nope=1".into()]).is_err());
    }

    #[test]
    fn overrides_are_typed_and_nested() {
        let cfg = parse_config(
            MINIMAL,
            &[
                "model.token_dim=64".into(),
                "model.mixer=none".into(),
                "train.lr=0.01".into(),
                "run.seeds=[1, 2, 3]".into(),
                "data.ratios=[0.6, 0.2, 0.2]".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.model.token_dim, 64);
        assert_eq!(cfg.model.mixer, "none");
        assert_eq!(cfg.train.lr, 0.01);
        assert_eq!(cfg.seeds(), vec![1, 2, 3]);
        assert_eq!(cfg.split_spec().unwrap(), SplitSpec::ratios(0.6, 0.2, 0.2).unwrap());
        assert!(parse_config(MINIMAL, &["model.token_dim".into()]).is_err());
        assert!(parse_config(MINIMAL, &["data.path.x=1".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for ov in [
            "model.mixer=attention",
            "model.dropout=1.5",
            "train.batch_size=0",
            "ablate.variants=[\"cnn2d_5\"]",
            "correlate.mode=\"diagonal\"",
            "data.preset=\"M4\"",
            "data.split=\"weekly\"",
            "profile.trials=0",
        ] {
            assert!(parse_config(MINIMAL, &[ov.into()]).is_err(), "{ov}");
        }
        assert!(parse_config("[data]\n", &[]).is_err());
        assert!(parse_config("[data]\npath = \"a\"\n[data.synthetic]\n", &[]).is_err());
    }

    #[test]
    fn preset_supplies_split_and_date_column() {
        let cfg = parse_config("[data]\npath = \"ETTh1.csv\"\npreset = \"ETTh1\"\n", &[]).unwrap();
        assert_eq!(cfg.split_spec().unwrap(), SplitSpec::ett_hourly());
        assert!(cfg.has_date_column());
        let cfg = parse_config("[data]\npath = \"p.csv\"\npreset = \"PEMS04\"\n", &[]).unwrap();
        assert!(!cfg.has_date_column());
    }

    #[test]
    fn echoed_config_parses_back_identically() {
        let cfg = parse_config("[data]\n[data.synthetic]\nrows = 500\n", &["model.horizon=24".into()]).unwrap();
        let echoed = cfg.to_toml().unwrap();
        assert_eq!(parse_config(&echoed, &[]).unwrap(), cfg);
    }
}
