use super::Matrix;
use crate::error::{Error, Result};
use crate::rng::RngState;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Exact GELU, `x * Phi(x)` with the Gaussian CDF evaluated through erf.
#[inline]
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2))
}

#[inline]
fn gelu_derivative(x: f64) -> f64 {
    let cdf = 0.5 * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2));
    let pdf = FRAC_1_SQRT_2PI * (-0.5 * x * x).exp();
    cdf + x * pdf
}

pub fn gelu_forward(x: &Matrix) -> Result<Matrix> {
    x.ensure_finite("gelu input")?;
    Ok(x.map(gelu))
}

pub fn gelu_backward(x: &Matrix, upstream: &Matrix) -> Result<Matrix> {
    x.zip_map(upstream, "gelu backward", |x, g| g * gelu_derivative(x))
}

/// Intermediates of a row-wise layer norm.
#[derive(Debug, Clone)]
pub struct LayerNormCache {
    pub normalized: Matrix,
    pub inv_std: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LayerNormGrads {
    pub dx: Matrix,
    pub dgamma: Vec<f64>,
    pub dbeta: Vec<f64>,
}

/// Normalizes each row over its `d` features with biased variance, then
/// applies the per-feature affine `gamma`, `beta`.
pub fn layer_norm_forward(
    x: &Matrix,
    gamma: &[f64],
    beta: &[f64],
    eps: f64,
) -> Result<(Matrix, LayerNormCache)> {
    let d = x.cols();
    if d == 0 || gamma.len() != d || beta.len() != d {
        return Err(Error::shape(
            "layer norm",
            format!(
                "{} features, gamma {}, beta {}",
                d,
                gamma.len(),
                beta.len()
            ),
        ));
    }
    if eps <= 0.0 {
        return Err(Error::Config(format!("layer norm eps must be > 0, got {eps}")));
    }
    let mut normalized = Matrix::zeros(x.rows(), d);
    let mut out = Matrix::zeros(x.rows(), d);
    let mut inv_std = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = x.row(i);
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let istd = 1.0 / (var + eps).sqrt();
        inv_std.push(istd);
        let nrow = normalized.row_mut(i);
        for (n, v) in nrow.iter_mut().zip(row) {
            *n = (v - mean) * istd;
        }
        let nrow = normalized.row(i).to_vec();
        for (k, o) in out.row_mut(i).iter_mut().enumerate() {
            *o = nrow[k] * gamma[k] + beta[k];
        }
    }
    Ok((
        out,
        LayerNormCache {
            normalized,
            inv_std,
            gamma: gamma.to_vec(),
        },
    ))
}

pub fn layer_norm_backward(cache: &LayerNormCache, upstream: &Matrix) -> Result<LayerNormGrads> {
    let xhat = &cache.normalized;
    xhat.ensure_same_shape(upstream, "layer norm backward")?;
    let (rows, d) = xhat.shape();
    let mut dx = Matrix::zeros(rows, d);
    let mut dgamma = vec![0.0; d];
    let mut dbeta = vec![0.0; d];
    let mut dxhat = vec![0.0; d];
    for i in 0..rows {
        let g = upstream.row(i);
        let xh = xhat.row(i);
        let mut sum = 0.0;
        let mut dot = 0.0;
        for k in 0..d {
            dgamma[k] += g[k] * xh[k];
            dbeta[k] += g[k];
            dxhat[k] = g[k] * cache.gamma[k];
            sum += dxhat[k];
            dot += dxhat[k] * xh[k];
        }
        let scale = cache.inv_std[i] / d as f64;
        for (k, o) in dx.row_mut(i).iter_mut().enumerate() {
            *o = scale * (d as f64 * dxhat[k] - sum - xh[k] * dot);
        }
    }
    Ok(LayerNormGrads { dx, dgamma, dbeta })
}

/// Inverted dropout. The returned mask holds the per-element multiplier
/// (`0` or `1/(1-p)` in training, all ones otherwise), so backward is a
/// plain elementwise product with the mask.
pub fn dropout(x: &Matrix, p: f64, training: bool, rng: &mut RngState) -> Result<(Matrix, Matrix)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Config(format!("dropout rate must be in [0, 1), got {p}")));
    }
    if !training || p == 0.0 {
        return Ok((x.clone(), Matrix::filled(x.rows(), x.cols(), 1.0)));
    }
    let keep = 1.0 / (1.0 - p);
    let mut mask = Matrix::zeros(x.rows(), x.cols());
    for m in mask.data_mut() {
        *m = if rng.uniform() < p { 0.0 } else { keep };
    }
    let out = x.hadamard(&mask)?;
    Ok((out, mask))
}
