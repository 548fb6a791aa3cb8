//! Versioned JSON model file: network weights plus the fitted encoder.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Network, Topology};
use crate::dataset::{DatasetError, Encoder};

pub const MODEL_FORMAT_VERSION: u64 = 1;
const ACTIVATION: &str = "sigmoid";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("not a model file (expected a JSON object with format_version)")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    VersionUnsupported(u64),
    #[error("unsupported activation {0:?}")]
    UnsupportedActivation(String),
    #[error("{field} has {got} entries, topology requires {expected}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("model file is truncated")]
    TruncatedFile,
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("model contains non-finite parameters")]
    NonFinite,
    #[error(transparent)]
    Encoder(#[from] DatasetError),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    topology: [usize; 3],
    activation: String,
    v: Vec<f64>,
    v0: Vec<f64>,
    w: Vec<f64>,
    w0: Vec<f64>,
    encoder: Encoder,
}

/// Serializes a network and its encoder. Floats use the shortest text that
/// parses back to the same bits.
pub fn save_model(net: &Network, encoder: &Encoder) -> Result<String, ModelError> {
    if !net.is_finite() {
        return Err(ModelError::NonFinite);
    }
    let t = net.topology;
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        topology: [t.n_in, t.n_hidden, t.n_out],
        activation: ACTIVATION.to_string(),
        v: net.v.clone(),
        v0: net.v0.clone(),
        w: net.w.clone(),
        w0: net.w0.clone(),
        encoder: encoder.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| ModelError::Malformed(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn check_dim(field: &'static str, expected: usize, got: usize) -> Result<(), ModelError> {
    if expected != got {
        return Err(ModelError::DimensionMismatch { field, expected, got });
    }
    Ok(())
}

pub fn load_model(text: &str) -> Result<(Network, Encoder), ModelError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        if e.is_eof() {
            ModelError::TruncatedFile
        } else {
            ModelError::BadMagic
        }
    })?;
    let version = value
        .as_object()
        .and_then(|o| o.get("format_version"))
        .ok_or(ModelError::BadMagic)?
        .as_u64()
        .ok_or(ModelError::BadMagic)?;
    if version != MODEL_FORMAT_VERSION {
        return Err(ModelError::VersionUnsupported(version));
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| ModelError::Malformed(e.to_string()))?;
    if file.activation != ACTIVATION {
        return Err(ModelError::UnsupportedActivation(file.activation));
    }
    let [n_in, n_hidden, n_out] = file.topology;
    let topology = Topology::new(n_in, n_hidden, n_out).map_err(|e| ModelError::Malformed(e.to_string()))?;
    check_dim("v", n_in * n_hidden, file.v.len())?;
    check_dim("v0", n_hidden, file.v0.len())?;
    check_dim("w", n_hidden * n_out, file.w.len())?;
    check_dim("w0", n_out, file.w0.len())?;
    file.encoder.validate()?;
    let net = Network {
        topology,
        v: file.v,
        v0: file.v0,
        w: file.w,
        w0: file.w0,
    };
    if !net.is_finite() {
        return Err(ModelError::NonFinite);
    }
    Ok((net, file.encoder))
}
