//! Binary checkpoints.
//!
//! Layout: the 8 bytes `ACFLOW1\0`, the header length as a little-endian
//! `u64`, a UTF-8 JSON header, then the field as row-major little-endian
//! `f64` values.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::energetics::ModelSpec;
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::solver::BcOrder;

pub const MAGIC: &[u8; 8] = b"ACFLOW1\0";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub domain_kind: String,
    pub dim: usize,
    pub shape: [usize; 2],
    pub domain: DomainSpec,
    pub epsilon: f64,
    pub time: f64,
    pub step: u64,
    pub model: ModelSpec,
    pub bc_order: BcOrder,
    pub config_hash: String,
    /// See [`crate::harness::RunConfig::trajectory_hash`].
    pub trajectory_hash: String,
}

pub fn encode_checkpoint(header: &CheckpointHeader, values: &[f64]) -> Result<Vec<u8>> {
    let [a, b] = header.shape;
    if a * b != values.len() {
        return Err(Error::Checkpoint(format!("shape {a}x{b} does not match {} values", values.len())));
    }
    let json = serde_json::to_vec(header)?;
    let mut out = Vec::with_capacity(16 + json.len() + 8 * values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(CheckpointHeader, Vec<f64>)> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing ACFLOW1 magic"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(16..16 + len).ok_or_else(|| bad("truncated header"))?;
    let header: CheckpointHeader = serde_json::from_slice(body).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let data = &bytes[16 + len..];
    let n = header.shape[0] * header.shape[1];
    if data.len() != 8 * n {
        return Err(Error::Checkpoint(format!("expected {n} values, found {} bytes", data.len())));
    }
    let values: Vec<f64> = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite value"));
    }
    Ok((header, values))
}

pub fn write_checkpoint(path: &Path, header: &CheckpointHeader, values: &[f64]) -> Result<()> {
    let bytes = encode_checkpoint(header, values)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, Vec<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_checkpoint(&bytes)
}
