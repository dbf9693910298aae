use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// A multivariate series, one row per time step and one column per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDataset {
    pub name: String,
    pub values: Matrix,
    pub column_names: Vec<String>,
    pub frequency: Option<String>,
    /// Row index of `values[0]` in the file this dataset was cut from.
    pub start_row: usize,
}

impl SeriesDataset {
    pub fn new(name: impl Into<String>, values: Matrix, column_names: Vec<String>) -> Result<Self> {
        if column_names.len() != values.cols() {
            return Err(Error::Data(format!(
                "{} column names for {} columns",
                column_names.len(),
                values.cols()
            )));
        }
        values.ensure_finite("dataset values").map_err(|e| Error::Data(e.to_string()))?;
        Ok(Self {
            name: name.into(),
            values,
            column_names,
            frequency: None,
            start_row: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn num_variables(&self) -> usize {
        self.values.cols()
    }

    /// Rows `[start, end)` as a new dataset.
    pub fn slice(&self, start: usize, end: usize) -> SeriesDataset {
        SeriesDataset {
            name: self.name.clone(),
            values: self.values.slice_rows(start, end),
            column_names: self.column_names.clone(),
            frequency: self.frequency.clone(),
            start_row: self.start_row + start,
        }
    }

    pub fn with_values(&self, values: Matrix) -> SeriesDataset {
        SeriesDataset {
            values,
            ..self.clone()
        }
    }
}

/// Reads a comma-separated file with a header row. When `has_date_column`
/// is set the first column is skipped.
pub fn load_csv(path: &Path, has_date_column: bool) -> Result<SeriesDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let skip = usize::from(has_date_column);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() <= skip {
        return Err(Error::Data(format!("{}: no value columns", path.display())));
    }
    let column_names: Vec<String> = headers.iter().skip(skip).map(str::to_owned).collect();
    let n = column_names.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "{}: data row {idx} has {} fields, header has {}",
                path.display(),
                record.len(),
                headers.len()
            )));
        }
        for (col, cell) in record.iter().skip(skip).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Data(format!(
                    "{}: data row {idx}, column '{}': cannot parse '{cell}'",
                    path.display(),
                    column_names[col]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{}: data row {idx}, column '{}': non-finite value",
                    path.display(),
                    column_names[col]
                )));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    SeriesDataset::new(name, Matrix::new(rows, n, data)?, column_names)
}

/// Writes `ds` as CSV with a header row and no date column.
pub fn write_csv(ds: &SeriesDataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    w.write_record(&ds.column_names).map_err(io)?;
    for i in 0..ds.rows() {
        w.write_record(ds.values.row(i).iter().map(|v| format!("{v:?}")))
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn plain_and_dated_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y\n1,2\n3,4\n5,6\n");
        let ds = load_csv(&p, false).unwrap();
        assert_eq!(ds.values.shape(), (3, 2));
        assert_eq!(ds.values.row(2), &[5.0, 6.0]);
        assert_eq!(ds.column_names, vec!["x", "y"]);

        let p = write(
            dir.path(),
            "b.csv",
            "date,HUFL,OT\n2016-07-01 00:00:00,5.8,30.5\n2016-07-01 01:00:00,5.6,27.8\n",
        );
        let ds = load_csv(&p, true).unwrap();
        assert_eq!(ds.num_variables(), 2);
        assert_eq!(ds.column_names, vec!["HUFL", "OT"]);
        assert_eq!(ds.name, "b");
    }

    #[test]
    fn errors_carry_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.csv", "x,y\n1,2\n3,oops\n");
        let err = load_csv(&p, false).unwrap_err().to_string();
        assert!(err.contains("row 1") && err.contains("'y'"), "{err}");

        let p = write(dir.path(), "ragged.csv", "x,y\n1,2\n3\n");
        assert!(matches!(load_csv(&p, false), Err(Error::Data(_))));

        let p = write(dir.path(), "nan.csv", "x\nNaN\n");
        assert!(load_csv(&p, false).is_err());

        let missing = dir.path().join("missing.csv");
        let err = load_csv(&missing, false).unwrap_err().to_string();
        assert!(err.contains("missing.csv"));
    }

    #[test]
    fn write_then_read_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let values = Matrix::from_fn(4, 3, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0));
        let ds = SeriesDataset::new("s", values, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let p = dir.path().join("s.csv");
        write_csv(&ds, &p).unwrap();
        let back = load_csv(&p, false).unwrap();
        assert_eq!(back.values, ds.values);
    }
}
