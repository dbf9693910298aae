use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::TimeCnnParams;

/// Moment estimates shaped like the parameters, plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: TimeCnnParams,
    pub v: TimeCnnParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &TimeCnnParams) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }
}

/// Bias-corrected Adam on flat slices; `step` is the 1-based step index.
#[allow(clippy::too_many_arguments)]
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    let n = params.len();
    if grads.len() != n || m.len() != n || v.len() != n {
        return Err(Error::shape(
            "adam",
            format!(
                "params {n}, grads {}, moments {}/{}",
                grads.len(),
                m.len(),
                v.len()
            ),
        ));
    }
    if step == 0 {
        return Err(Error::Config("adam step index starts at 1".into()));
    }
    let c1 = 1.0 - beta1.powi(step as i32);
    let c2 = 1.0 - beta2.powi(step as i32);
    for i in 0..n {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// One Adam step over every tensor at learning rate `lr`.
pub fn adam_step(
    params: &mut TimeCnnParams,
    grads: &TimeCnnParams,
    state: &mut AdamState,
    cfg: &TrainConfig,
    lr: f64,
) -> Result<()> {
    let g = grads.tensors();
    let p_count = params.tensors().len();
    if g.len() != p_count
        || state.m.tensors().len() != p_count
        || state.v.tensors().len() != p_count
    {
        return Err(Error::shape("adam", "tensor count differs"));
    }
    state.step += 1;
    let step = state.step;
    for (((p, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(g)
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut())
    {
        adam_update(p, g, m, v, step, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)?;
    }
    Ok(())
}
