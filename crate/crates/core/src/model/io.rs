//! Matrix and vector interchange.
//!
//! Two formats are understood:
//! - CSV: one matrix row per line, comma separated, no header;
//! - JSON: `{"rows": R, "cols": C, "entries": [...]}` with row-major entries.
//!
//! Numbers are written in shortest round-trip form, so reading back what was
//! written reproduces every value bit for bit. Vectors are matrices with a
//! single row or a single column; a bare JSON array is accepted for them too.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

pub fn parse_matrix_csv(text: &str) -> std::result::Result<Matrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| format!("line {}: cannot parse {f:?} as a number", line + 1))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn parse_matrix_json(text: &str) -> std::result::Result<Matrix, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn parse_vector_json(text: &str) -> std::result::Result<Vec<f64>, String> {
    if let Ok(v) = serde_json::from_str::<Vec<f64>>(text) {
        return Ok(v);
    }
    parse_matrix_json(text).and_then(matrix_to_vector)
}

fn matrix_to_vector(m: Matrix) -> std::result::Result<Vec<f64>, String> {
    match m.shape() {
        (1, _) | (_, 1) => Ok(m.entries().to_vec()),
        (r, c) => Err(format!("expected a vector, found a {r}x{c} matrix")),
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = match Format::from_path(path) {
        Format::Csv => parse_matrix_csv(&text),
        Format::Json => parse_matrix_json(&text),
    };
    parsed.map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = match Format::from_path(path) {
        Format::Csv => parse_matrix_csv(&text).and_then(matrix_to_vector),
        Format::Json => parse_vector_json(&text),
    };
    parsed.map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_to_json(m: &Matrix) -> String {
    serde_json::to_string(m).expect("matrix serialization cannot fail")
}

/// A vector as a one-column CSV.
pub fn vector_to_csv(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}\n")).collect()
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let text = match Format::from_path(path) {
        Format::Csv => matrix_to_csv(m),
        Format::Json => matrix_to_json(m),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let text = match Format::from_path(path) {
        Format::Csv => vector_to_csv(v),
        Format::Json => serde_json::to_string(v).expect("vector serialization cannot fail"),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
