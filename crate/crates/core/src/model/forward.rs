use super::ffn::{add_into, ffn_block_backward, ffn_block_forward, FfnCache};
use super::instance_norm::{instance_denorm, instance_norm, InstanceStats};
use super::{Gradients, ModelConfig, TimeCnnParams};
use crate::crosscnn::{mixer_backward, mixer_forward, MixerCache};
use crate::error::{Error, Result};
use crate::numeric::{layer_norm_backward, layer_norm_forward, GradTape, LayerNormCache, Matrix};
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// One forward stage and what its backward needs.
#[derive(Debug, Clone)]
pub enum TapeOp {
    InstanceNorm(InstanceStats),
    Mixer(MixerCache),
    Transpose,
    Embed { input: Matrix },
    Ffn { block: usize, cache: Box<FfnCache> },
    FinalNorm(LayerNormCache),
    Project { input: Matrix },
    Denorm(InstanceStats),
}

pub type Tape = GradTape<TapeOp>;

/// Runs the model on one `L x N` window and returns the `T x N` forecast
/// together with the tape needed by [`backward`].
///
/// Stage order: instance norm, mixer (with skip), transpose to `N x L`,
/// embedding to `N x D`, the FFN blocks, final layer norm, projection to
/// `N x T`, transpose back, denorm. Dropout is active only in
/// [`Mode::Train`].
pub fn forward(
    x: &Matrix,
    params: &TimeCnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut RngState,
) -> Result<(Matrix, Tape)> {
    if x.shape() != (cfg.lookback, cfg.num_variables) {
        return Err(Error::shape(
            "input",
            format!(
                "window is {:?}, model expects {}x{}",
                x.shape(),
                cfg.lookback,
                cfg.num_variables
            ),
        ));
    }
    params.validate(cfg)?;
    x.ensure_finite("input")?;
    let training = mode == Mode::Train;
    let mut tape = Tape::new();

    let mut stats = None;
    let mut h = if cfg.use_instance_norm {
        let (z, s) = instance_norm(x, cfg.instance_norm_eps)?;
        tape.push(TapeOp::InstanceNorm(s.clone()));
        stats = Some(s);
        z
    } else {
        x.clone()
    };

    let (mixed, cache) = mixer_forward(&h, &params.mixer, cfg.dropout, training, rng)?;
    tape.push(TapeOp::Mixer(cache));
    h = mixed.transpose();
    tape.push(TapeOp::Transpose);

    let mut tokens = h.matmul(&params.embed_w)?;
    tokens.add_row_vector(&params.embed_b)?;
    tape.push(TapeOp::Embed { input: h });

    for (block, p) in params.blocks.iter().enumerate() {
        let (out, cache) = ffn_block_forward(&tokens, p, cfg.ln_eps, cfg.dropout, training, rng)?;
        tape.push(TapeOp::Ffn {
            block,
            cache: Box::new(cache),
        });
        tokens = out;
    }

    let (normed, ln_cache) =
        layer_norm_forward(&tokens, &params.final_gamma, &params.final_beta, cfg.ln_eps)?;
    tape.push(TapeOp::FinalNorm(ln_cache));

    let mut proj = normed.matmul(&params.proj_w)?;
    proj.add_row_vector(&params.proj_b)?;
    tape.push(TapeOp::Project { input: normed });

    let mut yhat = proj.transpose();
    tape.push(TapeOp::Transpose);

    if let Some(s) = stats {
        yhat = instance_denorm(&yhat, &s)?;
        tape.push(TapeOp::Denorm(s));
    }
    yhat.ensure_finite("forecast")?;
    Ok((yhat, tape))
}

/// Eval-mode forecast without keeping the tape.
pub fn predict(x: &Matrix, params: &TimeCnnParams, cfg: &ModelConfig) -> Result<Matrix> {
    // Eval mode never draws from the generator.
    let mut rng = RngState::new(0);
    forward(x, params, cfg, Mode::Eval, &mut rng).map(|(y, _)| y)
}

/// Parameter gradients given `d loss / d yhat`. Instance statistics depend
/// only on the data, so they are constants here.
pub fn backward(tape: &Tape, params: &TimeCnnParams, upstream: &Matrix) -> Result<Gradients> {
    let mut grads = params.zeros_like();
    tape.replay_backward(upstream.clone(), |g, op| -> Result<Matrix> {
        match op {
            TapeOp::Denorm(s) => {
                if g.cols() != s.std.len() {
                    return Err(Error::shape("denorm backward", "variable count differs"));
                }
                Ok(Matrix::from_fn(g.rows(), g.cols(), |i, j| g.get(i, j) * s.std[j]))
            }
            TapeOp::Transpose => Ok(g.transpose()),
            TapeOp::Project { input } => {
                grads.proj_w.add_assign(&input.t_matmul(&g)?)?;
                add_into(&mut grads.proj_b, &g.column_sums());
                g.matmul_t(&params.proj_w)
            }
            TapeOp::FinalNorm(cache) => {
                let lg = layer_norm_backward(cache, &g)?;
                add_into(&mut grads.final_gamma, &lg.dgamma);
                add_into(&mut grads.final_beta, &lg.dbeta);
                Ok(lg.dx)
            }
            TapeOp::Ffn { block, cache } => {
                let p = params
                    .blocks
                    .get(*block)
                    .ok_or_else(|| Error::shape("ffn backward", format!("no block {block}")))?;
                ffn_block_backward(p, cache, &g, &mut grads.blocks[*block])
            }
            TapeOp::Embed { input } => {
                grads.embed_w.add_assign(&input.t_matmul(&g)?)?;
                add_into(&mut grads.embed_b, &g.column_sums());
                g.matmul_t(&params.embed_w)
            }
            TapeOp::Mixer(cache) => {
                let (dx, dmixer) = mixer_backward(&params.mixer, cache, &g)?;
                grads.mixer = dmixer;
                Ok(dx)
            }
            // Input gradient through the statistics is not needed for
            // parameter updates.
            TapeOp::InstanceNorm(_) => Ok(g),
        }
    })?;
    Ok(grads)
}
