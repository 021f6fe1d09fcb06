//! Checks against artifacts produced by the weight exporter.
//!
//! The exporter writes, next to each W2VFE file, a manifest
//!
//! ```json
//! {
//!   "source_model": "facebook/wav2vec2-base",
//!   "revision": "<hub commit hash>",
//!   "layers": [ LayerConfig, ... ],
//!   "tensor_map": { "<source tensor name>": "conv.0.weight", ... },
//!   "checksums": { "conv.0.weight": "<sha256 hex of little-endian f32 bytes>", ... },
//!   "reference_outputs": [ { "spec": SignalSpec, "path": "ref_100hz.csv" }, ... ]
//! }
//! ```
//!
//! and reference encoder outputs as CSV: header `d0,…,d{D-1}`, one row per
//! time step. The same CSV layout is produced by `sineprobe encode`.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::format::tensor_checksums;
use crate::encoder::{EncoderModel, LayerConfig};
use crate::signalgen::SignalSpec;
use crate::table::{Cell, Table};

/// Per-element absolute tolerance between this engine and reference outputs.
pub const PARITY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ParityError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: row {row}: {reason}", path.display())]
    BadRow {
        path: PathBuf,
        row: usize,
        reason: String,
    },
    #[error("shape {found:?} does not match reference {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOutput {
    pub spec: SignalSpec,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub source_model: String,
    #[serde(default)]
    pub revision: Option<String>,
    pub layers: Vec<LayerConfig>,
    pub tensor_map: BTreeMap<String, String>,
    pub checksums: BTreeMap<String, String>,
    #[serde(default)]
    pub reference_outputs: Vec<ReferenceOutput>,
}

impl ExportManifest {
    pub fn load(path: &Path) -> Result<Self, ParityError> {
        let bytes = std::fs::read(path).map_err(|source| ParityError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_slice(&bytes).map_err(|source| ParityError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Human-readable discrepancies between a manifest and a loaded model.
/// Empty means the round trip is intact.
pub fn verify_manifest(model: &EncoderModel, manifest: &ExportManifest) -> Vec<String> {
    let mut problems = Vec::new();
    if manifest.layers != model.layers() {
        problems.push("layer configuration differs".to_string());
    }
    let ours = tensor_checksums(model);
    for (name, sum) in &ours {
        match manifest.checksums.get(name) {
            Some(theirs) if theirs.eq_ignore_ascii_case(sum) => {}
            Some(theirs) => problems.push(format!("{name}: checksum {sum} != manifest {theirs}")),
            None => problems.push(format!("{name}: missing from manifest")),
        }
    }
    for name in manifest.checksums.keys() {
        if !ours.contains_key(name) {
            problems.push(format!("{name}: in manifest but not in model"));
        }
    }
    let mut targets: BTreeMap<&str, usize> = BTreeMap::new();
    for target in manifest.tensor_map.values() {
        *targets.entry(target.as_str()).or_default() += 1;
    }
    for name in ours.keys() {
        match targets.get(name.as_str()) {
            Some(1) => {}
            Some(n) => problems.push(format!("{name}: mapped from {n} source tensors")),
            None => problems.push(format!("{name}: no source tensor in tensor_map")),
        }
    }
    problems
}

/// `T × D` matrix as a `d0,…` CSV table.
pub fn representation_table(matrix: &Array2<f64>) -> Table {
    let header = (0..matrix.ncols()).map(|j| format!("d{j}")).collect();
    let rows = matrix
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|&v| Cell::Num(v)).collect())
        .collect();
    Table::new(header, rows)
}

pub fn read_representation_csv(path: &Path) -> Result<Array2<f64>, ParityError> {
    let csv_err = |source| ParityError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let cols = reader.headers().map_err(csv_err)?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != cols {
            return Err(ParityError::BadRow {
                path: path.to_path_buf(),
                row: i + 1,
                reason: format!("{} fields, header has {cols}", record.len()),
            });
        }
        for field in record.iter() {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| ParityError::BadRow {
                        path: path.to_path_buf(),
                        row: i + 1,
                        reason: e.to_string(),
                    })?,
            );
        }
        rows += 1;
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("rows checked"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityResult {
    pub max_abs_diff: f64,
    pub passed: bool,
}

pub fn compare(
    ours: &Array2<f64>,
    reference: &Array2<f64>,
    tolerance: f64,
) -> Result<ParityResult, ParityError> {
    if ours.dim() != reference.dim() {
        return Err(ParityError::ShapeMismatch {
            expected: reference.dim(),
            found: ours.dim(),
        });
    }
    let max_abs_diff = ours
        .iter()
        .zip(reference.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ParityResult {
        max_abs_diff,
        passed: max_abs_diff <= tolerance,
    })
}
