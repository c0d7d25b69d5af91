//! Persistence of eigenpairs: JSON metadata and a compact binary format for
//! eigenvector blocks.
//!
//! Binary layout: the 4-byte magic `EIGV`, then little-endian `u32` version,
//! `u32` row count `n` and `u32` column count `k`, followed by `n·k`
//! little-endian `f64` values in column-major order.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::EigPairs;
use crate::error::{Error, Result};

pub const EIGV_MAGIC: &[u8; 4] = b"EIGV";
pub const EIGV_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

/// Encodes a matrix in the `EIGV` format.
pub fn encode_eigv(vectors: &DMatrix<f64>) -> Result<Vec<u8>> {
    let (n, k) = vectors.shape();
    let too_big = |what: &str, v: usize| Error::InvalidBinary(format!("{what} = {v} does not fit in u32"));
    let n32 = u32::try_from(n).map_err(|_| too_big("n", n))?;
    let k32 = u32::try_from(k).map_err(|_| too_big("k", k))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n * k);
    out.extend_from_slice(EIGV_MAGIC);
    out.extend_from_slice(&EIGV_VERSION.to_le_bytes());
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&k32.to_le_bytes());
    // nalgebra storage is column-major already.
    for v in vectors.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Decodes an `EIGV` buffer; rejects bad magic, unknown versions and any
/// length mismatch.
pub fn decode_eigv(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::InvalidBinary(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != EIGV_MAGIC {
        return Err(Error::InvalidBinary("bad magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != EIGV_VERSION {
        return Err(Error::InvalidBinary(format!("unsupported version {version}")));
    }
    let (n, k) = (word(8) as usize, word(12) as usize);
    let payload = &bytes[HEADER_LEN..];
    let expected = n
        .checked_mul(k)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::InvalidBinary(format!("size {n}×{k} overflows")))?;
    if payload.len() != expected {
        return Err(Error::InvalidBinary(format!(
            "{n}×{k} needs {expected} payload bytes, found {}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    Ok(DMatrix::from_iterator(n, k, values))
}

pub fn save_eigv(path: impl AsRef<Path>, vectors: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_eigv(vectors)?).map_err(|e| Error::io(path, e))
}

pub fn load_eigv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    decode_eigv(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

impl EigPairs {
    /// Values, residuals and solver metadata as JSON (vectors are not included).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
