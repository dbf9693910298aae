//! Dense double-precision primitives. Every forward op that carries
//! parameters or feeds a gradient has a matching backward here.

mod gradcheck;
pub mod mac;
mod matrix;
mod ops;
mod tape;

pub use gradcheck::{check_gradients, central_difference};
pub use matrix::Matrix;
pub use ops::{
    dropout, gelu, gelu_backward, gelu_forward, layer_norm_backward, layer_norm_forward,
    LayerNormCache, LayerNormGrads,
};
pub use tape::GradTape;
