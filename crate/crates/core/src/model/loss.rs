use crate::error::Result;
use crate::numeric::Matrix;

/// Training objective: squared error summed over variables, averaged over
/// the `T` horizon steps.
pub fn training_loss(yhat: &Matrix, y: &Matrix) -> Result<f64> {
    let diff = yhat.sub(y)?;
    Ok(diff.data().iter().map(|d| d * d).sum::<f64>() / yhat.rows() as f64)
}

/// `d loss / d yhat = (2/T)(yhat - y)`.
pub fn training_loss_grad(yhat: &Matrix, y: &Matrix) -> Result<Matrix> {
    let t = yhat.rows() as f64;
    yhat.zip_map(y, "loss gradient", |a, b| 2.0 * (a - b) / t)
}

/// Per-element MSE used for reporting (divides by `T * N`).
pub fn metric_mse(yhat: &Matrix, y: &Matrix) -> Result<f64> {
    let diff = yhat.sub(y)?;
    Ok(diff.data().iter().map(|d| d * d).sum::<f64>() / diff.len() as f64)
}
