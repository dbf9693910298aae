//! Central-difference gradient verification.

use crate::error::{Error, Result};

/// Central-difference gradient of `f` at `params` with step `h`.
pub fn central_difference(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    params: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut probe = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = f(&probe)?;
        probe[i] = orig - h;
        let down = f(&probe)?;
        probe[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!(
                "objective at coordinate {i}: f(+h) = {up}, f(-h) = {down}"
            )));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// Largest relative disagreement between `analytic` and a central-difference
/// gradient of `f`, using `|fd - g| / max(1e-8, |fd| + |g|)` per coordinate.
pub fn check_gradients(
    f: impl FnMut(&[f64]) -> Result<f64>,
    analytic: &[f64],
    params: &[f64],
    h: f64,
) -> Result<f64> {
    if analytic.len() != params.len() {
        return Err(Error::shape(
            "gradient check",
            format!("{} analytic entries for {} params", analytic.len(), params.len()),
        ));
    }
    let numeric = central_difference(f, params, h)?;
    Ok(numeric
        .iter()
        .zip(analytic)
        .map(|(fd, g)| (fd - g).abs() / (fd.abs() + g.abs()).max(1e-8))
        .fold(0.0, f64::max))
}
