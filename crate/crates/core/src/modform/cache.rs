//! Binary cache for integer coefficient tables.
//!
//! Layout (little-endian): magic `TAUC`, `u32` format version, `u64` entry count `N`,
//! `N` entries `a(1) .. a(N)` as `i128`, then a `u64` checksum equal to the first eight
//! bytes of the SHA-256 digest of the entry bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TAUC";
pub const VERSION: u32 = 1;

pub fn cache_path(dir: &Path, n_max: usize) -> PathBuf {
    dir.join(format!("delta_tau_{n_max}.bin"))
}

fn checksum(payload: &[u8]) -> u64 {
    let digest = Sha256::digest(payload);
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

fn corrupt(reason: &str) -> Error {
    Error::Serialization(format!("coefficient cache: {reason}"))
}

/// Reads a table of exactly `n_max` entries. `Ok(None)` when the file does not exist,
/// an error when it exists but is malformed.
pub fn load(path: &Path, n_max: usize) -> Result<Option<Vec<i128>>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let expected = 4 + 4 + 8 + 16 * n_max + 8;
    if bytes.len() != expected {
        return Err(corrupt("unexpected length"));
    }
    if &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(corrupt("unsupported version"));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if count != n_max as u64 {
        return Err(corrupt("entry count mismatch"));
    }
    let payload = &bytes[16..16 + 16 * n_max];
    let stored = u64::from_le_bytes(bytes[16 + 16 * n_max..].try_into().unwrap());
    if checksum(payload) != stored {
        return Err(corrupt("checksum mismatch"));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0);
    out.extend(payload.chunks_exact(16).map(|c| i128::from_le_bytes(c.try_into().unwrap())));
    Ok(Some(out))
}

/// Writes `table[1..]` atomically (temporary file then rename).
pub fn store(path: &Path, table: &[i128]) -> Result<()> {
    let entries = &table[1..];
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut payload = Vec::with_capacity(16 * entries.len());
    for v in entries {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(MAGIC)?;
    tmp.write_all(&VERSION.to_le_bytes())?;
    tmp.write_all(&(entries.len() as u64).to_le_bytes())?;
    tmp.write_all(&payload)?;
    tmp.write_all(&checksum(&payload).to_le_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
