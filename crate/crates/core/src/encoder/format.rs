//! W2VFE weight container.
//!
//! ```text
//! offset  size  content
//! 0       8     ASCII magic "W2VFE001" ("W2VFE" + 3-digit version)
//! 8       4     header length H, u32 little-endian
//! 12      H     UTF-8 JSON header
//! 12+H    ...   data section: little-endian f32, row-major, at each
//!               tensor's `offset` (bytes, relative to the data section)
//! ```
//!
//! Header:
//! `{model_name, input_normalize, epsilon, layers: [LayerConfig], tensors: [{name, shape, dtype: "f32", offset}]}`

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{required_tensors, EncoderModel, LayerConfig, Tensor};

pub const MAGIC_PREFIX: &[u8; 5] = b"W2VFE";
pub const VERSION: &[u8; 3] = b"001";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{}: no such file", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("bad magic {found:?}, expected \"W2VFE001\"")]
    BadMagic { found: String },
    #[error("unsupported format version {found:?}")]
    UnsupportedVersion { found: String },
    #[error("malformed header field {field}: {reason}")]
    MalformedHeader { field: String, reason: String },
    #[error("tensor {tensor}: expected shape {expected:?}, found {found:?}")]
    ShapeMismatch {
        tensor: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("{what}: needs {needed} bytes, only {available} available")]
    TruncatedData {
        what: String,
        needed: usize,
        available: usize,
    },
}

impl ModelError {
    /// Stable snake_case identifier for machine-readable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::FileNotFound(_) => "file_not_found",
            ModelError::Io { .. } => "io_error",
            ModelError::BadMagic { .. } => "bad_magic",
            ModelError::UnsupportedVersion { .. } => "unsupported_version",
            ModelError::MalformedHeader { .. } => "malformed_header",
            ModelError::ShapeMismatch { .. } => "shape_mismatch",
            ModelError::TruncatedData { .. } => "truncated_data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub model_name: String,
    pub input_normalize: bool,
    pub epsilon: f64,
    pub layers: Vec<LayerConfig>,
    pub tensors: Vec<TensorEntry>,
}

fn take<'a>(bytes: &'a [u8], start: usize, len: usize, what: &str) -> Result<&'a [u8], ModelError> {
    let available = bytes.len().saturating_sub(start);
    if available < len {
        return Err(ModelError::TruncatedData {
            what: what.to_string(),
            needed: len,
            available,
        });
    }
    Ok(&bytes[start..start + len])
}

/// Split a file image into its header and data section.
pub fn parse_header(bytes: &[u8]) -> Result<(Header, &[u8]), ModelError> {
    let magic = take(bytes, 0, 8, "magic")?;
    if &magic[..5] != MAGIC_PREFIX {
        return Err(ModelError::BadMagic {
            found: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    if &magic[5..] != VERSION {
        return Err(ModelError::UnsupportedVersion {
            found: String::from_utf8_lossy(&magic[5..]).into_owned(),
        });
    }
    let len_bytes = take(bytes, 8, 4, "header length")?;
    let header_len = u32::from_le_bytes(len_bytes.try_into().expect("4 bytes")) as usize;
    let header_bytes = take(bytes, 12, header_len, "header")?;
    let text = std::str::from_utf8(header_bytes).map_err(|e| ModelError::MalformedHeader {
        field: "header".into(),
        reason: format!("not UTF-8: {e}"),
    })?;
    let header: Header = serde_json::from_str(text).map_err(|e| ModelError::MalformedHeader {
        field: "header".into(),
        reason: e.to_string(),
    })?;
    Ok((header, &bytes[12 + header_len..]))
}

/// Parse a complete W2VFE image.
pub fn from_bytes(bytes: &[u8]) -> Result<EncoderModel, ModelError> {
    let (header, data) = parse_header(bytes)?;
    let mut tensors = BTreeMap::new();
    for entry in &header.tensors {
        if entry.dtype != "f32" {
            return Err(ModelError::MalformedHeader {
                field: format!("tensors.{}.dtype", entry.name),
                reason: format!("unsupported dtype {:?}", entry.dtype),
            });
        }
        let count = entry
            .shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(4).map(|b| (n, b)));
        let Some((count, byte_len)) = count else {
            return Err(ModelError::MalformedHeader {
                field: format!("tensors.{}.shape", entry.name),
                reason: "size overflows".into(),
            });
        };
        let raw = take(data, entry.offset, byte_len, &entry.name)?;
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        debug_assert_eq!(values.len(), count);
        if tensors
            .insert(entry.name.clone(), Tensor::new(entry.shape.clone(), values))
            .is_some()
        {
            return Err(ModelError::MalformedHeader {
                field: "tensors".into(),
                reason: format!("duplicate tensor {}", entry.name),
            });
        }
    }
    EncoderModel::new(
        header.model_name,
        header.input_normalize,
        header.epsilon,
        header.layers,
        tensors,
    )
}

fn read_file(path: &Path) -> Result<Vec<u8>, ModelError> {
    fs::read(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => ModelError::FileNotFound(path.to_path_buf()),
        _ => ModelError::Io {
            path: path.to_path_buf(),
            source,
        },
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EncoderModel, ModelError> {
    from_bytes(&read_file(path.as_ref())?)
}

/// Header of an existing file, without building the model.
pub fn read_header(path: impl AsRef<Path>) -> Result<Header, ModelError> {
    let bytes = read_file(path.as_ref())?;
    parse_header(&bytes).map(|(h, _)| h)
}

/// Header describing `model` with tensors packed contiguously in layer order.
pub fn header_for(model: &EncoderModel) -> Header {
    let mut offset = 0;
    let tensors = required_tensors(model.layers())
        .into_iter()
        .map(|(name, shape)| {
            let entry = TensorEntry {
                offset,
                dtype: "f32".into(),
                shape: shape.clone(),
                name,
            };
            offset += shape.iter().product::<usize>() * 4;
            entry
        })
        .collect();
    Header {
        model_name: model.name().to_string(),
        input_normalize: model.input_normalize(),
        epsilon: model.epsilon(),
        layers: model.layers().to_vec(),
        tensors,
    }
}

pub fn to_bytes(model: &EncoderModel) -> Vec<u8> {
    let header = header_for(model);
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len());
    out.extend_from_slice(MAGIC_PREFIX);
    out.extend_from_slice(VERSION);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for entry in &header.tensors {
        out.extend_from_slice(&model.tensors()[&entry.name].to_le_bytes());
    }
    out
}

pub fn save_model(model: &EncoderModel, path: impl AsRef<Path>) -> io::Result<()> {
    fs::write(path, to_bytes(model))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of each tensor's little-endian bytes, keyed by tensor name.
pub fn tensor_checksums(model: &EncoderModel) -> BTreeMap<String, String> {
    model
        .tensors()
        .iter()
        .map(|(name, t)| (name.clone(), sha256_hex(&t.to_le_bytes())))
        .collect()
}

pub fn file_checksum(path: impl AsRef<Path>) -> Result<String, ModelError> {
    read_file(path.as_ref()).map(|b| sha256_hex(&b))
}
