//! Report container and its on-disk layout.
//!
//! A report directory holds:
//!
//! | file             | content                                                  |
//! |------------------|----------------------------------------------------------|
//! | `config.json`    | the [`ExperimentConfig`] that produced the report        |
//! | `labels.csv`     | one row per encoded signal with its parameters           |
//! | `matrix.csv`     | labeled matrix (similarity, distance or CKA)             |
//! | `neighbors.csv`  | `a,b,distance` for neighboring signals                   |
//! | `scale.csv`      | `frequency,cumulative,mel_norm,bark_norm,encoder_norm`   |
//! | `projection.csv` | `label,x,y` from classical MDS                           |
//! | `steps.csv`      | per-step burst distances (temporal burst only)           |
//! | `summary.json`   | version, model checksums and every scalar statistic      |
//!
//! Files are only written when the experiment produces them. Each file is
//! written to a temporary name in the same directory and then renamed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{ExperimentConfig, ExperimentError};
use crate::metrics::DistanceMatrix;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    #[serde(with = "crate::metrics::matrix_rows")]
    pub values: Array2<f64>,
}

impl LabeledMatrix {
    pub fn square(labels: Vec<String>, values: Array2<f64>) -> Self {
        Self {
            row_labels: labels.clone(),
            col_labels: labels,
            values,
        }
    }

    pub fn to_table(&self) -> Table {
        let mut header = vec!["label".to_string()];
        header.extend(self.col_labels.iter().cloned());
        let rows = self
            .row_labels
            .iter()
            .zip(self.values.rows())
            .map(|(label, row)| {
                std::iter::once(Cell::from(label.as_str()))
                    .chain(row.iter().map(|&v| Cell::Num(v)))
                    .collect()
            })
            .collect();
        Table::new(header, rows)
    }

    /// `max |M - Mᵀ|`.
    pub fn symmetry_residual(&self) -> f64 {
        let m = &self.values;
        m.indexed_iter()
            .map(|((i, j), &v)| (v - m[[j, i]]).abs())
            .fold(0.0, f64::max)
    }
}

impl From<DistanceMatrix> for LabeledMatrix {
    fn from(d: DistanceMatrix) -> Self {
        LabeledMatrix::square(d.labels, d.values)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub path: Option<PathBuf>,
    /// SHA-256 of the weight file (or of its canonical encoding for in-memory models).
    pub sha256: String,
    pub window: usize,
    pub stride: usize,
    pub feature_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub toolkit_version: String,
    pub models: Vec<ModelInfo>,
    pub labels: Table,
    pub matrix: Option<LabeledMatrix>,
    pub neighbors: Option<Table>,
    pub scale: Option<Table>,
    pub projection: Option<Table>,
    pub steps: Option<Table>,
    pub summary: Map<String, Value>,
}

impl ExperimentReport {
    /// Scalar statistic by key.
    pub fn number(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    pub fn tables(&self) -> Vec<(&'static str, Table)> {
        let mut out = vec![("labels.csv", self.labels.clone())];
        if let Some(m) = &self.matrix {
            out.push(("matrix.csv", m.to_table()));
        }
        for (name, t) in [
            ("neighbors.csv", &self.neighbors),
            ("scale.csv", &self.scale),
            ("projection.csv", &self.projection),
            ("steps.csv", &self.steps),
        ] {
            if let Some(t) = t {
                out.push((name, t.clone()));
            }
        }
        out
    }

    /// Every number in the report must be finite.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        for (name, table) in self.tables() {
            if let Some((row, col)) = table.first_non_finite() {
                return Err(ExperimentError::NonFinite(format!(
                    "{name} row {row} column {col}"
                )));
            }
        }
        fn check(path: &str, v: &Value) -> Result<(), ExperimentError> {
            match v {
                Value::Number(n) if n.as_f64().is_some_and(|x| !x.is_finite()) => {
                    Err(ExperimentError::NonFinite(path.to_string()))
                }
                Value::Array(items) => items
                    .iter()
                    .enumerate()
                    .try_for_each(|(i, x)| check(&format!("{path}[{i}]"), x)),
                Value::Object(map) => map
                    .iter()
                    .try_for_each(|(k, x)| check(&format!("{path}.{k}"), x)),
                _ => Ok(()),
            }
        }
        self.summary
            .iter()
            .try_for_each(|(k, v)| check(&format!("summary.{k}"), v))
    }

    pub fn summary_document(&self) -> Value {
        serde_json::json!({
            "toolkit_version": self.toolkit_version,
            "models": self.models,
            "statistics": self.summary,
        })
    }

    /// Write the report directory, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        self.validate()?;
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
        let mut written = Vec::new();
        let config = serde_json::to_vec_pretty(&self.config).expect("config serializes");
        written.push(write_atomic(dir, "config.json", &config)?);
        for (name, table) in self.tables() {
            let bytes = table
                .to_csv()
                .map_err(|e| ExperimentError::io(&dir.join(name), io::Error::other(e)))?;
            written.push(write_atomic(dir, name, &bytes)?);
        }
        let summary =
            serde_json::to_vec_pretty(&self.summary_document()).expect("summary serializes");
        written.push(write_atomic(dir, "summary.json", &summary)?);
        Ok(written)
    }
}

/// Write `dir/name` through a temporary sibling and rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, ExperimentError> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| ExperimentError::io(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| ExperimentError::io(&target, e))?;
    Ok(target)
}
