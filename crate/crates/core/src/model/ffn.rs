use super::FfnParams;
use crate::error::Result;
use crate::numeric::{
    dropout, gelu_backward, gelu_forward, layer_norm_backward, layer_norm_forward, LayerNormCache,
    Matrix,
};
use crate::rng::RngState;

#[derive(Debug, Clone)]
pub struct FfnCache {
    ln: LayerNormCache,
    ln_out: Matrix,
    pre_act: Matrix,
    hidden_mask: Matrix,
    hidden: Matrix,
    out_mask: Matrix,
}

/// `X_h = Dropout(GELU(LayerNorm(X) W1 + b1))`,
/// `X_out = Dropout(X_h W2 + b2) + X`.
pub fn ffn_block_forward(
    x: &Matrix,
    p: &FfnParams,
    ln_eps: f64,
    dropout_p: f64,
    training: bool,
    rng: &mut RngState,
) -> Result<(Matrix, FfnCache)> {
    let (ln_out, ln) = layer_norm_forward(x, &p.ln_gamma, &p.ln_beta, ln_eps)?;
    let mut pre_act = ln_out.matmul(&p.w1)?;
    pre_act.add_row_vector(&p.b1)?;
    let act = gelu_forward(&pre_act)?;
    let (hidden, hidden_mask) = dropout(&act, dropout_p, training, rng)?;
    let mut z = hidden.matmul(&p.w2)?;
    z.add_row_vector(&p.b2)?;
    let (dropped, out_mask) = dropout(&z, dropout_p, training, rng)?;
    let out = dropped.add(x)?;
    Ok((
        out,
        FfnCache {
            ln,
            ln_out,
            pre_act,
            hidden_mask,
            hidden,
            out_mask,
        },
    ))
}

/// Returns the input gradient and accumulates parameter gradients into `grads`.
pub fn ffn_block_backward(
    p: &FfnParams,
    cache: &FfnCache,
    upstream: &Matrix,
    grads: &mut FfnParams,
) -> Result<Matrix> {
    let dz = upstream.hadamard(&cache.out_mask)?;
    grads.w2.add_assign(&cache.hidden.t_matmul(&dz)?)?;
    add_into(&mut grads.b2, &dz.column_sums());
    let dhidden = dz.matmul_t(&p.w2)?.hadamard(&cache.hidden_mask)?;
    let dpre = gelu_backward(&cache.pre_act, &dhidden)?;
    grads.w1.add_assign(&cache.ln_out.t_matmul(&dpre)?)?;
    add_into(&mut grads.b1, &dpre.column_sums());
    let dln = dpre.matmul_t(&p.w1)?;
    let ln_grads = layer_norm_backward(&cache.ln, &dln)?;
    add_into(&mut grads.ln_gamma, &ln_grads.dgamma);
    add_into(&mut grads.ln_beta, &ln_grads.dbeta);
    upstream.add(&ln_grads.dx)
}

pub(crate) fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
