use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Per-variable statistics of one lookback window.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceStats {
    pub mean: Vec<f64>,
    /// Biased standard deviation, floored at `sqrt(eps)`.
    pub std: Vec<f64>,
}

/// Standardizes each column of `x` over its `L` rows.
pub fn instance_norm(x: &Matrix, eps: f64) -> Result<(Matrix, InstanceStats)> {
    let (l, n) = x.shape();
    if l == 0 {
        return Err(Error::shape("instance norm", "empty lookback"));
    }
    let floor = eps.sqrt();
    let mut mean = vec![0.0; n];
    for i in 0..l {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= l as f64;
    }
    let mut var = vec![0.0; n];
    for i in 0..l {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|s| (s / l as f64).sqrt().max(floor)).collect();
    let out = Matrix::from_fn(l, n, |i, j| (x.get(i, j) - mean[j]) / std[j]);
    Ok((out, InstanceStats { mean, std }))
}

pub fn instance_denorm(yhat: &Matrix, stats: &InstanceStats) -> Result<Matrix> {
    if yhat.cols() != stats.mean.len() || stats.std.len() != stats.mean.len() {
        return Err(Error::shape(
            "instance denorm",
            format!("{} columns, stats for {}", yhat.cols(), stats.mean.len()),
        ));
    }
    Ok(Matrix::from_fn(yhat.rows(), yhat.cols(), |i, j| {
        yhat.get(i, j) * stats.std[j] + stats.mean[j]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    #[test]
    fn constant_column_is_zeroed_and_floored() {
        let x = Matrix::from_fn(5, 2, |i, j| if j == 0 { 4.0 } else { i as f64 });
        let (y, stats) = instance_norm(&x, 1e-5).unwrap();
        assert!(y.column(0).iter().all(|&v| v == 0.0));
        assert_eq!(stats.std[0], 1e-5f64.sqrt());
        assert!(stats.std.iter().all(|&s| s >= 1e-5f64.sqrt()));
    }

    #[test]
    fn standardized_column_is_unchanged() {
        let col = [1.0, -1.0, 1.0, -1.0];
        let x = Matrix::from_fn(4, 1, |i, _| col[i]);
        let (y, _) = instance_norm(&x, 1e-5).unwrap();
        assert!(y.max_abs_diff(&x) < 1e-9);
    }

    #[test]
    fn denorm_identity_and_zero_prediction() {
        let y = Matrix::from_fn(3, 2, |i, j| (i + j) as f64);
        let unit = InstanceStats {
            mean: vec![0.0, 0.0],
            std: vec![1.0, 1.0],
        };
        assert_eq!(instance_denorm(&y, &unit).unwrap(), y);
        let stats = InstanceStats {
            mean: vec![2.5, -1.0],
            std: vec![3.0, 0.5],
        };
        let z = instance_denorm(&Matrix::zeros(4, 2), &stats).unwrap();
        for i in 0..4 {
            assert_eq!(z.row(i), &[2.5, -1.0]);
        }
        assert!(instance_denorm(&Matrix::zeros(4, 3), &stats).is_err());
    }

    #[test]
    fn round_trip() {
        let mut rng = RngState::new(21);
        for _ in 0..20 {
            let x = Matrix::from_fn(24, 5, |_, j| 10.0 * rng.normal() + j as f64 * 50.0);
            let (z, stats) = instance_norm(&x, 1e-5).unwrap();
            let back = instance_denorm(&z, &stats).unwrap();
            assert!(back.max_abs_diff(&x) < 1e-9);
        }
    }
}
