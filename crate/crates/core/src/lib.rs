//! TimeCNN forecasting engine.
//!
//! A lookback window `X (L x N)` is optionally instance-normalized, mixed
//! across variables independently at every time point by a circular
//! convolution ([`crosscnn`]), transposed into one token per variable,
//! embedded, refined by a stack of residual FFN blocks, layer-normalized and
//! projected to the horizon `T`. Every stage has a hand-written backward pass
//! so the whole model trains with plain Adam and no autodiff framework.

pub mod crosscnn;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
pub use numeric::Matrix;
pub use rng::RngState;
