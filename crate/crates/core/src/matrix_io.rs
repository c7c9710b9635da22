//! Reading feature, probability and embedding matrices.
//!
//! Two layouts are accepted:
//!
//! * CSV with one header row, one sample per line, all fields numeric.
//! * Raw binary: little-endian `u64` row count, `u64` column count, then
//!   `rows * cols` little-endian `f64` values in row-major order. Files ending
//!   in `.bin` or `.f64` are read this way.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval_gen::FeatureMatrix;

pub fn parse_csv_matrix(text: &str) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let d = reader.headers()?.len();
    let mut values = Vec::new();
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != d {
            return Err(Error::Parse {
                source_name: "matrix".into(),
                line: i + 2,
                message: format!("{} fields, expected {d}", record.len()),
            });
        }
        for field in record.iter() {
            values.push(field.parse::<f64>().map_err(|_| Error::Parse {
                source_name: "matrix".into(),
                line: i + 2,
                message: format!("bad number `{field}`"),
            })?);
        }
        n += 1;
    }
    FeatureMatrix::from_row_major(n, d, values)
}

pub fn parse_binary_matrix(bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < 16 {
        return Err(Error::Validation("binary matrix shorter than its header".into()));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Validation("binary matrix shape overflows".into()))?;
    if body.len() != expected {
        return Err(Error::Validation(format!(
            "binary matrix {n}x{d} needs {expected} bytes, found {}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::from_row_major(n, d, values)
}

pub fn encode_binary_matrix(rows: &[Vec<f64>]) -> Vec<u8> {
    let n = rows.len() as u64;
    let d = rows.first().map_or(0, Vec::len) as u64;
    let mut out = Vec::with_capacity(16 + rows.len() * d as usize * 8);
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    for v in rows.iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    let binary = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("bin") | Some("f64")
    );
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if binary {
        parse_binary_matrix(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Validation(format!("{} is not UTF-8", path.display())))?;
        parse_csv_matrix(&text)
    }
}
