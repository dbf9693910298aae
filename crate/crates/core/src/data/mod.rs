//! Dataset ingestion, chronological splits, scaling, windowing, noise
//! injection and the synthetic dynamic-correlation generator.

mod dataset;
mod noise;
mod presets;
mod scaler;
mod split;
mod synth;
mod windows;

pub use dataset::{load_csv, write_csv, SeriesDataset};
pub use noise::inject_noise;
pub use presets::{preset, DatasetPreset, PRESET_NAMES};
pub use scaler::{fit_scaler, Scaler};
pub use split::{split, split_scaled, SplitSpec, Splits};
pub use synth::{synth_dynamic_corr, SynthConfig};
pub use windows::{windows, WindowSample, Windows};
