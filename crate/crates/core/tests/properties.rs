use proptest::prelude::*;
use timecnn_core::crosscnn::{CrossCnnParams, MixerVariant};
use timecnn_core::data::{fit_scaler, windows, SeriesDataset};
use timecnn_core::model::{instance_denorm, instance_norm, read_checkpoint, write_checkpoint, ModelConfig, TimeCnnParams};
use timecnn_core::{Matrix, RngState};

fn matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = RngState::new(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.normal())
}

fn mix(x: &Matrix, w: &Matrix) -> Matrix {
    MixerVariant::CrossCnn(CrossCnnParams::new(w.clone())).mix(x).unwrap()
}

proptest! {
    #[test]
    fn circular_shift_equivariance(l in 1usize..12, n in 1usize..12, s in 0usize..12, seed in any::<u64>()) {
        let x = matrix(l, n, seed);
        let w = matrix(l, n, seed ^ 1);
        let shifted = Matrix::from_fn(l, n, |i, j| x.get(i, (j + s) % n));
        let base = mix(&x, &w);
        let out = mix(&shifted, &w);
        let expect = Matrix::from_fn(l, n, |i, j| base.get(i, (j + s) % n));
        prop_assert_eq!(out, expect);
    }

    #[test]
    fn kernel_row_touches_only_its_timepoint(l in 2usize..12, n in 1usize..10, row in 0usize..12, seed in any::<u64>()) {
        let row = row % l;
        let x = matrix(l, n, seed);
        let w = matrix(l, n, seed ^ 2);
        let mut bumped = w.clone();
        for v in bumped.row_mut(row) {
            *v += 1.0;
        }
        let a = mix(&x, &w);
        let b = mix(&x, &bumped);
        for i in (0..l).filter(|&i| i != row) {
            prop_assert_eq!(a.row(i), b.row(i));
        }
    }

    #[test]
    fn instance_norm_round_trip(l in 1usize..40, n in 1usize..8, scale in -3.0f64..3.0, seed in any::<u64>()) {
        let s = 10f64.powf(scale);
        let x = matrix(l, n, seed).map(|v| 5.0 + s * v);
        let (z, stats) = instance_norm(&x, 1e-5).unwrap();
        let back = instance_denorm(&z, &stats).unwrap();
        prop_assert!(back.max_abs_diff(&x) < 1e-9);
    }

    #[test]
    fn scaler_round_trip(rows in 2usize..60, n in 1usize..6, seed in any::<u64>()) {
        let names = (0..n).map(|j| format!("c{j}")).collect();
        let ds = SeriesDataset::new("p", matrix(rows, n, seed).map(|v| 3.0 * v - 1.0), names).unwrap();
        let scaler = fit_scaler(&ds).unwrap();
        let back = scaler.invert(&scaler.apply(&ds).unwrap()).unwrap();
        prop_assert!(back.values.max_abs_diff(&ds.values) < 1e-9);
    }

    #[test]
    fn window_count(rows in 1usize..80, l in 1usize..20, t in 1usize..20) {
        let ds = SeriesDataset::new("w", matrix(rows, 2, 1), vec!["a".into(), "b".into()]).unwrap();
        match windows(&ds, l, t, 1) {
            Ok(w) => {
                prop_assert_eq!(w.len(), rows + 1 - l - t);
                let last = w.get(w.len() - 1);
                prop_assert_eq!(last.y.row(t - 1), ds.values.row(rows - 1));
            }
            Err(_) => prop_assert!(rows < l + t),
        }
    }
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let mut cfg = ModelConfig::new(12, 4, 3);
    cfg.token_dim = 8;
    cfg.hidden_dim = 16;
    let params = TimeCnnParams::init(&cfg, &mut RngState::new(8)).unwrap();
    let bytes = write_checkpoint(&params, &cfg).unwrap();
    let (p, c) = read_checkpoint(&bytes).unwrap();
    assert_eq!(p, params);
    assert_eq!(c, cfg);
}
