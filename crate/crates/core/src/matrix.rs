//! Feature matrix container ("FMX1"): a UTF-8 JSON header line followed by
//! rows x cols little-endian f64 values, row-major.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MATRIX_MAGIC: &str = "FMX1";

#[derive(Debug, Serialize, Deserialize)]
struct MatrixHeader {
    magic: String,
    rows: usize,
    cols: usize,
    component_names: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<serde_json::Value>,
}

/// Rows = patches, columns = named feature components.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub component_names: Vec<String>,
    pub labels: Option<Vec<i8>>,
    /// Producing configuration, echoed into the file header.
    pub config: Option<serde_json::Value>,
    rows: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(
        component_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<i8>>,
    ) -> Result<Self> {
        let cols = component_names.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a {cols}-column matrix",
                bad.len()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != rows.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} rows",
                    l.len(),
                    rows.len()
                )));
            }
        }
        let n = rows.len();
        let data = rows.into_iter().flatten().collect();
        Ok(Self {
            component_names,
            labels,
            config: None,
            rows: n,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.component_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i)[j]).collect()
    }

    /// Restricts the matrix to the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&j) = columns.iter().find(|&&j| j >= self.cols()) {
            return Err(Error::OutOfBounds(format!("column {j} of {}", self.cols())));
        }
        let names = columns
            .iter()
            .map(|&j| self.component_names[j].clone())
            .collect();
        let rows = (0..self.rows)
            .map(|i| {
                let r = self.row(i);
                columns.iter().map(|&j| r[j]).collect()
            })
            .collect();
        let mut out = Self::from_rows(names, rows, self.labels.clone())?;
        out.config = self.config.clone();
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = MatrixHeader {
            magic: MATRIX_MAGIC.to_string(),
            rows: self.rows,
            cols: self.cols(),
            component_names: self.component_names.clone(),
            labels: self.labels.clone(),
            config: self.config.clone(),
        };
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut writer = BufWriter::new(file);
        let io_err = |source| Error::Io {
            path: path.to_owned(),
            source,
        };
        writer
            .write_all(serde_json::to_string(&header)?.as_bytes())
            .map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for &v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        writer.write_all(&bytes).map_err(io_err)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut reader = BufReader::new(file);
        let mut header_line = String::new();
        reader
            .read_line(&mut header_line)
            .map_err(|source| Error::Io {
                path: path.to_owned(),
                source,
            })?;
        let header: MatrixHeader = serde_json::from_str(header_line.trim_end())
            .map_err(|e| Error::MalformedHeader(e.to_string()))?;
        if header.magic != MATRIX_MAGIC {
            return Err(Error::MalformedHeader(format!(
                "bad magic {:?}, expected {:?}",
                header.magic, MATRIX_MAGIC
            )));
        }
        if header.component_names.len() != header.cols {
            return Err(Error::MalformedHeader(format!(
                "{} component names for {} columns",
                header.component_names.len(),
                header.cols
            )));
        }
        let expected = header.rows * header.cols * 8;
        let mut payload = Vec::with_capacity(expected);
        reader.read_to_end(&mut payload).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        if payload.len() != expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: payload.len(),
            });
        }
        let data: Vec<f64> = payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(Self {
            component_names: header.component_names,
            labels: header.labels,
            config: header.config,
            rows: header.rows,
            data,
        })
    }

    pub fn labels_or_err(&self) -> Result<&[i8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("feature matrix has no labels".into()))
    }
}
