//! Adam, the mini-batch training loop with early stopping, and multi-seed
//! orchestration.

mod adam;
mod config;
mod seeds;
mod trainer;

pub use adam::{adam_step, adam_update, AdamState};
pub use config::TrainConfig;
pub use seeds::{format_mean_std, mean_std, multi_seed_run, MultiSeedReport, SeedRun};
pub use trainer::{batch_gradient, train, write_history_jsonl, EpochRecord, TrainOutcome};
