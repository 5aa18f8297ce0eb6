//! On-disk tensor format.
//!
//! One UTF-8 JSON header line terminated by `\n`, then `(p+1)^k` raw
//! little-endian `f64` values in storage order (`j_1` fastest):
//!
//! ```text
//! {"schema_version":1,"basis":"legendre","k":2,"p":8,"weights":[0,0],
//!  "interval":{"start":0.0,"end":1.0},"normalization":"absolute",
//!  "index_order":"j1_fastest","endianness":"little"}\n
//! <payload>
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisKind, Interval};
use crate::coefficients::{
    check_multiplicity, for_each_index, CoefficientTensor, KernelSpec, Normalization,
};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const INDEX_ORDER: &str = "j1_fastest";
pub const ENDIANNESS: &str = "little";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub schema_version: u32,
    pub basis: BasisKind,
    pub k: usize,
    pub p: usize,
    pub weights: Vec<u32>,
    pub interval: Interval,
    pub normalization: Normalization,
    pub index_order: String,
    pub endianness: String,
    /// Configuration of the run that produced the file, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_config: Option<serde_json::Value>,
}

impl TensorHeader {
    pub fn for_tensor(tensor: &CoefficientTensor, run_config: Option<serde_json::Value>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            basis: tensor.basis,
            k: tensor.k(),
            p: tensor.p,
            weights: tensor.spec.weights().to_vec(),
            interval: tensor.spec.interval(),
            normalization: tensor.normalization,
            index_order: INDEX_ORDER.to_owned(),
            endianness: ENDIANNESS.to_owned(),
            run_config,
        }
    }
}

pub fn encode_tensor(tensor: &CoefficientTensor, run_config: Option<serde_json::Value>) -> Vec<u8> {
    let header = TensorHeader::for_tensor(tensor, run_config);
    let mut bytes = serde_json::to_vec(&header).expect("header serializes");
    bytes.push(b'\n');
    bytes.reserve(tensor.values.len() * 8);
    for v in &tensor.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn save_tensor(tensor: &CoefficientTensor, path: impl AsRef<Path>) -> Result<()> {
    save_tensor_with_config(tensor, path, None)
}

pub fn save_tensor_with_config(
    tensor: &CoefficientTensor,
    path: impl AsRef<Path>,
    run_config: Option<serde_json::Value>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_tensor(tensor, run_config)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<CoefficientTensor> {
    load_tensor_with_header(path).map(|(t, _)| t)
}

pub fn load_tensor_with_header(
    path: impl AsRef<Path>,
) -> Result<(CoefficientTensor, TensorHeader)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_tensor(&bytes, path)
}

pub fn decode_tensor(bytes: &[u8], origin: &Path) -> Result<(CoefficientTensor, TensorHeader)> {
    let corrupt = |reason: String| Error::CorruptHeader {
        path: origin.to_owned(),
        reason,
    };
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| corrupt("missing header terminator".into()))?;
    let raw: serde_json::Value = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| corrupt(format!("invalid JSON: {e}")))?;
    // Check the version before the full schema so newer files fail clearly.
    let version = raw
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| corrupt("missing schema_version".into()))?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(Error::UnknownSchema(version as u32));
    }
    let header: TensorHeader = serde_json::from_value(raw).map_err(|e| corrupt(e.to_string()))?;
    check_multiplicity(header.k)?;
    if header.index_order != INDEX_ORDER {
        return Err(corrupt(format!(
            "unsupported index_order '{}'",
            header.index_order
        )));
    }
    if header.endianness != ENDIANNESS {
        return Err(corrupt(format!(
            "unsupported endianness '{}'",
            header.endianness
        )));
    }
    if header.weights.len() != header.k {
        return Err(corrupt(format!(
            "{} weights for multiplicity {}",
            header.weights.len(),
            header.k
        )));
    }
    let interval = Interval::new(header.interval.start(), header.interval.end())
        .map_err(|e| corrupt(e.to_string()))?;
    let count = (header.p as u128 + 1)
        .checked_pow(header.k as u32)
        .filter(|&c| c <= (usize::MAX / 8) as u128)
        .ok_or_else(|| corrupt("tensor dimensions overflow".into()))? as usize;
    let payload = &bytes[newline + 1..];
    if payload.len() != count * 8 {
        return Err(Error::SizeMismatch {
            expected: count * 8,
            found: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight")))
        .collect();
    let spec = KernelSpec::new(header.weights.clone(), interval)?;
    let tensor = CoefficientTensor {
        spec,
        basis: header.basis,
        p: header.p,
        normalization: header.normalization,
        values,
    };
    Ok((tensor, header))
}

/// One row per multi-index: `j1,…,jk,value`.
pub fn write_csv<W: Write>(tensor: &CoefficientTensor, mut out: W) -> std::io::Result<()> {
    let k = tensor.k();
    let names: Vec<String> = (1..=k).map(|l| format!("j{l}")).collect();
    writeln!(out, "{},value", names.join(","))?;
    let mut result = Ok(());
    for_each_index(k, tensor.p, |j| {
        if result.is_err() {
            return;
        }
        let idx: Vec<String> = j.iter().map(|v| v.to_string()).collect();
        result = writeln!(out, "{},{:?}", idx.join(","), tensor.get(j));
    });
    result
}
