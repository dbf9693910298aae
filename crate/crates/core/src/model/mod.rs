//! The full forecaster: configuration, parameters, forward pass with a
//! gradient tape, loss functions, backward pass and checkpoints.

mod checkpoint;
mod config;
mod ffn;
mod forward;
mod instance_norm;
mod loss;
mod params;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use config::ModelConfig;
pub use ffn::{ffn_block_backward, ffn_block_forward, FfnCache};
pub use forward::{backward, forward, predict, Mode, Tape, TapeOp};
pub use instance_norm::{instance_denorm, instance_norm, InstanceStats};
pub use loss::{metric_mse, training_loss, training_loss_grad};
pub use params::{FfnParams, Gradients, TimeCnnParams};
