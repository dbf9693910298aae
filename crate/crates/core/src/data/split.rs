use super::{fit_scaler, Scaler, SeriesDataset};
use crate::error::{Error, Result};

/// How a series is cut into train, validation and test segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    /// Proportional cuts: train gets `floor(rows * train)`, test gets
    /// `floor(rows * test)` at the end, validation the rows in between.
    Ratios { train: f64, val: f64, test: f64 },
    /// Absolute row boundaries; rows past `test_end` are unused.
    Borders {
        train_end: usize,
        val_end: usize,
        test_end: usize,
    },
}

impl SplitSpec {
    pub fn ratios(train: f64, val: f64, test: f64) -> Result<Self> {
        let spec = SplitSpec::Ratios { train, val, test };
        spec.validate()?;
        Ok(spec)
    }

    /// 12/4/4 months of hourly data.
    pub fn ett_hourly() -> Self {
        let month = 30 * 24;
        SplitSpec::Borders {
            train_end: 12 * month,
            val_end: 16 * month,
            test_end: 20 * month,
        }
    }

    /// 12/4/4 months of 15-minute data.
    pub fn ett_minute() -> Self {
        let month = 30 * 24 * 4;
        SplitSpec::Borders {
            train_end: 12 * month,
            val_end: 16 * month,
            test_end: 20 * month,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SplitSpec::Ratios { train, val, test } => {
                if !(train > 0.0 && val > 0.0 && test > 0.0) {
                    return Err(Error::Config(format!(
                        "split ratios must all be > 0, got {train}:{val}:{test}"
                    )));
                }
                if ((train + val + test) - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "split ratios must sum to 1, got {}",
                        train + val + test
                    )));
                }
            }
            SplitSpec::Borders {
                train_end,
                val_end,
                test_end,
            } => {
                if !(0 < train_end && train_end < val_end && val_end < test_end) {
                    return Err(Error::Config(format!(
                        "split borders must increase, got {train_end}/{val_end}/{test_end}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(train_end, val_end, test_end)` for a series of `rows` rows.
    pub fn boundaries(&self, rows: usize) -> Result<(usize, usize, usize)> {
        self.validate()?;
        match *self {
            SplitSpec::Ratios { train, test, .. } => {
                let train_end = (rows as f64 * train + 1e-9).floor() as usize;
                let test_len = (rows as f64 * test + 1e-9).floor() as usize;
                Ok((train_end, rows - test_len, rows))
            }
            SplitSpec::Borders {
                train_end,
                val_end,
                test_end,
            } => {
                if test_end > rows {
                    return Err(Error::Data(format!(
                        "split needs {test_end} rows, dataset has {rows}"
                    )));
                }
                Ok((train_end, val_end, test_end))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Splits {
    pub train: SeriesDataset,
    pub val: SeriesDataset,
    pub test: SeriesDataset,
}

/// Chronological split. Validation and test segments are prefixed with the
/// last `lookback` rows of the preceding segment, so their first window
/// forecasts from the true boundary onward.
pub fn split(ds: &SeriesDataset, spec: &SplitSpec, lookback: usize, horizon: usize) -> Result<Splits> {
    let (train_end, val_end, test_end) = spec.boundaries(ds.rows())?;
    if train_end < lookback {
        return Err(Error::Data(format!(
            "train segment ({train_end} rows) shorter than lookback {lookback}"
        )));
    }
    let parts = [
        ("train", 0, train_end),
        ("val", train_end - lookback, val_end),
        ("test", val_end - lookback, test_end),
    ];
    for (name, start, end) in parts {
        if end - start < lookback + horizon {
            return Err(Error::Data(format!(
                "{name} segment has {} rows, needs at least L+T = {}",
                end - start,
                lookback + horizon
            )));
        }
    }
    Ok(Splits {
        train: ds.slice(parts[0].1, parts[0].2),
        val: ds.slice(parts[1].1, parts[1].2),
        test: ds.slice(parts[2].1, parts[2].2),
    })
}

/// [`split`], then z-scores every segment with statistics fitted on the
/// training segment only.
pub fn split_scaled(
    ds: &SeriesDataset,
    spec: &SplitSpec,
    lookback: usize,
    horizon: usize,
) -> Result<(Splits, Scaler)> {
    let raw = split(ds, spec, lookback, horizon)?;
    let scaler = fit_scaler(&raw.train)?;
    let splits = Splits {
        train: scaler.apply(&raw.train)?,
        val: scaler.apply(&raw.val)?,
        test: scaler.apply(&raw.test)?,
    };
    Ok((splits, scaler))
}
