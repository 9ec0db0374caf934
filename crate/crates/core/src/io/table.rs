use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Reads a dataset from a headed CSV file; every column other than the
/// treatment and outcome becomes a covariate, in file order.
pub fn load_csv(path: impl AsRef<Path>, treatment_column: &str, outcome_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    read_csv(File::open(path)?, path, treatment_column, outcome_column)
}

/// As [`load_csv`] from any reader; `path` only labels error messages.
/// Row numbers in errors count data rows from 1, excluding the header.
pub fn read_csv<R: Read>(reader: R, path: &Path, treatment_column: &str, outcome_column: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    };
    let t_idx = find(treatment_column)?;
    let y_idx = find(outcome_column)?;
    let cov_idx: Vec<usize> = (0..headers.len()).filter(|&i| i != t_idx && i != y_idx).collect();

    let mut x = Vec::new();
    let mut t = Vec::new();
    let mut y = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        let cell = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("").trim();
            let bad = |message: String| Error::BadCell {
                path: path.to_path_buf(),
                row,
                column: headers[i].clone(),
                message,
            };
            let v: f64 = raw.parse().map_err(|_| bad(format!("`{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(bad(format!("`{raw}` is not a finite number")));
            }
            Ok(v)
        };
        let raw_t = record.get(t_idx).unwrap_or("").trim();
        let tv = match raw_t.parse::<f64>() {
            Ok(v) if v == 0.0 => 0,
            Ok(v) if v == 1.0 => 1,
            _ => {
                return Err(Error::NonBinaryTreatment {
                    path: path.to_path_buf(),
                    row,
                    value: raw_t.to_string(),
                })
            }
        };
        t.push(tv);
        y.push(cell(y_idx)?);
        for &i in &cov_idx {
            x.push(cell(i)?);
        }
    }
    if t.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let n = t.len();
    let covariates = Array2::from_shape_vec((n, cov_idx.len()), x)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let names = cov_idx.iter().map(|&i| headers[i].clone()).collect();
    Dataset::new(covariates, Array1::from(t), Array1::from(y))?.with_feature_names(names)
}

/// Covariate matrix and names from a headed CSV, skipping the named columns
/// when present (e.g. treatment and outcome).
pub fn load_covariates(path: impl AsRef<Path>, skip: &[&str]) -> Result<(Array2<f64>, Vec<String>)> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(File::open(path)?);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let keep: Vec<usize> = (0..headers.len()).filter(|&i| !skip.contains(&headers[i].as_str())).collect();
    let mut values = Vec::new();
    let mut n = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        for &i in &keep {
            let raw = record.get(i).unwrap_or("").trim();
            let bad = |message: String| Error::BadCell {
                path: path.to_path_buf(),
                row: r + 1,
                column: headers[i].clone(),
                message,
            };
            let v: f64 = raw.parse().map_err(|_| bad(format!("`{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(bad(format!("`{raw}` is not a finite number")));
            }
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let x = Array2::from_shape_vec((n, keep.len()), values).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok((x, keep.iter().map(|&i| headers[i].clone()).collect()))
}

/// Writes covariates, then the treatment and outcome columns.
pub fn write_dataset_csv(path: impl AsRef<Path>, data: &Dataset, treatment_column: &str, outcome_column: &str) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_dataset_csv_to(file, data, treatment_column, outcome_column)
}

pub fn write_dataset_csv_to<W: Write>(writer: W, data: &Dataset, treatment_column: &str, outcome_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..data.p()).map(|j| data.feature_name(j)).collect();
    header.push(treatment_column.to_string());
    header.push(outcome_column.to_string());
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.treatment()[i].to_string());
        rec.push(data.outcome()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
