//! CSV reading and writing for data tables, predictor scores, pools and
//! reports.
//!
//! Floats are written in their shortest round-trip form, so a file read back
//! reproduces the values bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::data::{Dataset, RawTable};
use crate::error::{Error, Result};
use crate::minclass::{FrequencyMatrix, MinimalClass};
use crate::model::Model;
use crate::scalar::Scalar;
use crate::scoring::GammaScores;
use crate::search::{ModelPool, PoolEntry};
use crate::solver::CvResult;

pub const POOL_HEADER: [&str; 5] = ["size", "mse", "times_seen", "first_seen", "model"];
pub const GAMMA_HEADER: [&str; 6] = ["index", "predictor", "set", "i_star", "delta_star", "gamma"];

fn parse_float<F: Scalar>(field: &str, what: impl FnOnce() -> String) -> Result<F> {
    let t = field.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") {
        return Err(Error::InvalidInput(format!("missing value at {}", what())));
    }
    t.parse::<f64>()
        .map(F::lit)
        .map_err(|_| Error::InvalidInput(format!("non-numeric value {t:?} at {}", what())))
}

fn parse_count<T: std::str::FromStr>(field: &str, what: &str, row: usize) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad {what} {field:?} on line {}", row + 2)))
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::InvalidInput(format!("missing column {name:?}")))
}

/// Reads a numeric table with a header row. `response` names the outcome
/// column; every other column is a predictor. Empty, `NA` or `NaN` cells are
/// rejected.
pub fn read_table<F: Scalar, R: Read>(reader: R, response: &str) -> Result<RawTable<F>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let target = column_index(&headers, response)?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, h)| h.trim().to_string())
        .collect();
    let p = names.len();
    let mut values = Vec::new();
    let mut y = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != headers.len() {
            return Err(Error::DimensionMismatch {
                expected: headers.len(),
                found: rec.len(),
            });
        }
        for (i, field) in rec.iter().enumerate() {
            let v = parse_float(field, || format!("line {}, column {:?}", row + 2, &headers[i]))?;
            if i == target {
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = y.len();
    if n == 0 {
        return Err(Error::InvalidInput("table has no data rows".into()));
    }
    let x = Array2::from_shape_vec((n, p), values).map_err(|e| Error::InvalidInput(e.to_string()))?;
    RawTable::new(x, names, Array1::from(y))
}

pub fn read_table_path<F: Scalar>(path: impl AsRef<Path>, response: &str) -> Result<RawTable<F>> {
    read_table(File::open(path)?, response)
}

/// Writes a table with the response as the last column.
pub fn write_table<F: Scalar, W: Write>(table: &RawTable<F>, response: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = table.column_names.iter().map(String::as_str).collect();
    header.push(response);
    w.write_record(&header)?;
    for (row, yi) in table.values.rows().into_iter().zip(table.response.iter()) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(yi.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Pool rows in key order: by size, then lexicographically.
pub fn write_pool<F: Scalar, W: Write>(pool: &ModelPool<F>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POOL_HEADER)?;
    for (m, e) in pool.iter() {
        w.write_record([
            m.size().to_string(),
            e.mse.to_string(),
            e.times_seen.to_string(),
            e.first_seen.to_string(),
            m.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pool<F: Scalar, R: Read>(reader: R) -> Result<ModelPool<F>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = POOL_HEADER
        .iter()
        .map(|h| column_index(&headers, h))
        .collect::<Result<_>>()?;
    let mut pool = ModelPool::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let model: Model = rec[idx[4]].parse()?;
        let size: usize = parse_count(&rec[idx[0]], "size", row)?;
        if size != model.size() {
            return Err(Error::InvalidInput(format!(
                "line {}: size {size} does not match model {model}",
                row + 2
            )));
        }
        let mse = rec[idx[1]]
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("bad mse on line {}", row + 2)))?;
        pool.insert_entry(
            model,
            PoolEntry {
                mse: F::lit(mse),
                times_seen: parse_count(&rec[idx[2]], "times_seen", row)?,
                first_seen: parse_count(&rec[idx[3]], "first_seen", row)?,
            },
        );
    }
    Ok(pool)
}

pub fn write_gamma<F: Scalar, W: Write>(gamma: &GammaScores<F>, names: &[String], out: W) -> Result<()> {
    if names.len() != gamma.p() {
        return Err(Error::DimensionMismatch {
            expected: gamma.p(),
            found: names.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GAMMA_HEADER)?;
    for (j, name) in names.iter().enumerate() {
        let set = gamma
            .partition
            .as_ref()
            .map_or("given", |p| p.membership(j).label());
        w.write_record([
            j.to_string(),
            name.clone(),
            set.to_string(),
            gamma.i_star.get(j).map_or_else(String::new, usize::to_string),
            gamma.delta_star(j).map_or_else(String::new, |d| d.to_string()),
            gamma.get(j).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `index` and `gamma` columns of a score file. Indices must cover
/// `0..p` exactly once.
pub fn read_gamma<F: Scalar, R: Read>(reader: R) -> Result<GammaScores<F>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ci = column_index(&headers, "index")?;
    let cg = column_index(&headers, "gamma")?;
    let mut pairs = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let j: usize = parse_count(&rec[ci], "index", row)?;
        let g: F = parse_float(&rec[cg], || format!("line {}, column \"gamma\"", row + 2))?;
        pairs.push((j, g));
    }
    let p = pairs.len();
    let mut gamma = vec![None; p];
    for (j, g) in pairs {
        match gamma.get_mut(j) {
            Some(slot @ None) => *slot = Some(g),
            _ => return Err(Error::InvalidInput(format!("index {j} repeated or out of range"))),
        }
    }
    GammaScores::from_values(gamma.into_iter().map(|g| g.expect("all filled")).collect())
}

pub fn write_cv_curve<F: Scalar, W: Write>(cv: &CvResult<F>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "mean_mse", "std_err", "selected"])?;
    for (i, c) in cv.curve.iter().enumerate() {
        w.write_record([
            c.lambda.to_string(),
            c.mean_mse.to_string(),
            c.std_err.to_string(),
            u8::from(i == cv.index).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per predictor on the standardized and raw scales; the raw
/// intercept comes first with index `-1`.
pub fn write_coefficients<F: Scalar, W: Write>(data: &Dataset<F>, beta: &[F], out: W) -> Result<()> {
    if beta.len() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            found: beta.len(),
        });
    }
    let all = Model::new((0..beta.len()).collect())?;
    let (intercept, raw) = data.raw_coefficients(&all, beta)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "predictor", "standardized", "raw"])?;
    w.write_record(["-1".into(), "(intercept)".into(), String::new(), intercept.to_string()])?;
    for (j, (c, r)) in beta.iter().zip(&raw).enumerate() {
        w.write_record([
            j.to_string(),
            data.column_names()[j].clone(),
            c.to_string(),
            r.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_minimal_classes<F: Scalar, W: Write>(
    classes: &[MinimalClass<F>],
    names: &[String],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "rank", "mse", "gap", "model", "predictors"])?;
    for c in classes {
        for (rank, (m, mse)) in c.models.iter().enumerate() {
            let labels: Vec<&str> = m.indices().iter().map(|&j| names[j].as_str()).collect();
            w.write_record([
                c.kappa.to_string(),
                (rank + 1).to_string(),
                mse.to_string(),
                (*mse - c.best_mse).to_string(),
                m.to_string(),
                labels.join(";"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_unique_counts<W: Write>(counts: &[(usize, usize)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "models"])?;
    for (k, c) in counts {
        w.write_record([k.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Square matrix with predictor names as the first row and column.
pub fn write_frequency_matrix<W: Write>(fm: &FrequencyMatrix, names: &[String], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let labels: Vec<&str> = fm.predictors.iter().map(|&j| names[j].as_str()).collect();
    let mut header = vec![""];
    header.extend(&labels);
    w.write_record(&header)?;
    for (a, row) in fm.counts.iter().enumerate() {
        let mut rec = vec![labels[a].to_string()];
        rec.extend(row.iter().map(usize::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
