use super::SeriesDataset;
use crate::error::{Error, Result};
use crate::numeric::Matrix;
use crate::rng::RngState;

/// One `(lookback, horizon)` training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub x: Matrix,
    pub y: Matrix,
    /// First lookback row, relative to the segment.
    pub origin_index: usize,
}

/// Sliding windows over a segment. Window `k` starts at row `k * stride`.
#[derive(Debug, Clone)]
pub struct Windows<'a> {
    ds: &'a SeriesDataset,
    lookback: usize,
    horizon: usize,
    stride: usize,
    count: usize,
}

pub fn windows(ds: &SeriesDataset, lookback: usize, horizon: usize, stride: usize) -> Result<Windows<'_>> {
    Windows::new(ds, lookback, horizon, stride)
}

impl<'a> Windows<'a> {
    pub fn new(ds: &'a SeriesDataset, lookback: usize, horizon: usize, stride: usize) -> Result<Self> {
        if stride == 0 || horizon == 0 || lookback == 0 {
            return Err(Error::Config("lookback, horizon and stride must be >= 1".into()));
        }
        if ds.rows() < lookback + horizon {
            return Err(Error::Data(format!(
                "{} rows cannot hold one window of L+T = {}",
                ds.rows(),
                lookback + horizon
            )));
        }
        let count = (ds.rows() - lookback - horizon) / stride + 1;
        Ok(Self {
            ds,
            lookback,
            horizon,
            stride,
            count,
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn get(&self, k: usize) -> WindowSample {
        let t = k * self.stride;
        WindowSample {
            x: self.ds.values.slice_rows(t, t + self.lookback),
            y: self
                .ds
                .values
                .slice_rows(t + self.lookback, t + self.lookback + self.horizon),
            origin_index: t,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = WindowSample> + '_ {
        (0..self.count).map(|k| self.get(k))
    }

    /// Window indices in a seeded random order.
    pub fn shuffled_indices(&self, rng: &mut RngState) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.count).collect();
        rng.shuffle(&mut idx);
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(rows: usize) -> SeriesDataset {
        SeriesDataset::new(
            "ramp",
            Matrix::from_fn(rows, 2, |i, j| (i * 10 + j) as f64),
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn counts_and_contents() {
        let ds = ramp(10);
        let w = windows(&ds, 4, 2, 1).unwrap();
        assert_eq!(w.len(), 5);
        let s = w.get(3);
        assert_eq!(s.x.get(0, 0), 30.0);
        assert_eq!(s.y.get(0, 0), 70.0);
        assert_eq!(s.y.rows(), 2);
    }

    #[test]
    fn non_overlapping_stride() {
        let ds = ramp(30);
        let w = windows(&ds, 4, 2, 6).unwrap();
        let samples: Vec<_> = w.iter().collect();
        assert_eq!(samples.len(), 5);
        for pair in samples.windows(2) {
            assert_eq!(pair[1].origin_index - pair[0].origin_index, 6);
        }
    }

    #[test]
    fn shuffle_is_seeded() {
        let ds = ramp(50);
        let w = windows(&ds, 4, 2, 1).unwrap();
        let a = w.shuffled_indices(&mut RngState::new(3));
        let b = w.shuffled_indices(&mut RngState::new(3));
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (0..w.len()).collect::<Vec<_>>());
    }

    #[test]
    fn stride_one_covers_source() {
        let ds = ramp(20);
        let (l, t) = (5, 3);
        let w = windows(&ds, l, t, 1).unwrap();
        let mut covered = vec![false; 20];
        for s in w.iter() {
            for r in s.origin_index..s.origin_index + l {
                covered[r] = true;
            }
        }
        assert!(covered[..20 - t].iter().all(|&c| c));
        assert!(covered[20 - t..].iter().all(|&c| !c));
    }

    #[test]
    fn too_short_is_error() {
        assert!(matches!(windows(&ramp(5), 4, 2, 1), Err(Error::Data(_))));
    }
}
