use super::SeriesDataset;
use crate::error::{Error, Result};
use crate::rng::RngState;

/// Adds i.i.d. `N(0, sigma^2)` noise to one variable; other columns are
/// copied unchanged.
pub fn inject_noise(
    ds: &SeriesDataset,
    variable_index: usize,
    sigma: f64,
    rng: &mut RngState,
) -> Result<SeriesDataset> {
    if variable_index >= ds.num_variables() {
        return Err(Error::Config(format!(
            "variable {variable_index} out of range for {} variables",
            ds.num_variables()
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::Config(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut values = ds.values.clone();
    if sigma > 0.0 {
        for i in 0..values.rows() {
            let v = values.get(i, variable_index) + sigma * rng.normal();
            values.set(i, variable_index, v);
        }
    }
    Ok(ds.with_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Matrix;

    fn dataset(rows: usize) -> SeriesDataset {
        SeriesDataset::new(
            "d",
            Matrix::from_fn(rows, 3, |i, j| (i as f64).sin() + j as f64),
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let ds = dataset(20);
        assert_eq!(inject_noise(&ds, 1, 0.0, &mut RngState::new(1)).unwrap(), ds);
    }

    #[test]
    fn only_target_column_changes() {
        let ds = dataset(200);
        let noisy = inject_noise(&ds, 1, 0.5, &mut RngState::new(1)).unwrap();
        for j in [0, 2] {
            let a: Vec<u64> = ds.values.column(j).iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = noisy.values.column(j).iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
        }
        assert_ne!(ds.values.column(1), noisy.values.column(1));
        assert!(inject_noise(&ds, 3, 0.1, &mut RngState::new(1)).is_err());
    }

    #[test]
    fn unit_sigma_statistics() {
        let ds = dataset(100_000);
        let noisy = inject_noise(&ds, 0, 1.0, &mut RngState::new(2025)).unwrap();
        let delta: Vec<f64> = noisy
            .values
            .column(0)
            .iter()
            .zip(ds.values.column(0))
            .map(|(a, b)| a - b)
            .collect();
        let n = delta.len() as f64;
        let mean = delta.iter().sum::<f64>() / n;
        let sd = (delta.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((0.99..=1.01).contains(&sd), "{sd}");
    }
}
