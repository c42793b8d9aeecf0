//! On-disk cache of spectral decompositions.
//!
//! File layout (all integers and floats little-endian):
//!
//! | bytes         | content                                  |
//! |---------------|------------------------------------------|
//! | 8             | magic `SCMSPEC\0`                         |
//! | 1             | format version (currently 1)             |
//! | 1             | method: 0 exact, 1 nystrom               |
//! | 8             | `N` as u64                               |
//! | 8             | `N_e` as u64                             |
//! | 8 * N_e       | eigenvalues (f64)                        |
//! | 8 * N * N_e   | eigenvectors (f64), column-major         |
//!
//! Entries are named by a SHA-256 key over the feature matrix, the graph
//! parameters, the eigenpair count and the decomposition method.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::{Method, SpectralDecomposition};
use crate::dataio::FeatureMatrix;
use crate::error::{Error, Result};
use crate::graph::GraphParams;

pub const MAGIC: &[u8; 8] = b"SCMSPEC\0";
pub const VERSION: u8 = 1;

/// Hex SHA-256 over everything that determines a decomposition.
pub fn cache_key(features: &FeatureMatrix, p: &GraphParams, n_eigs: usize, method: &str) -> String {
    let mut h = Sha256::new();
    h.update((features.n_rows() as u64).to_le_bytes());
    h.update((features.n_cols() as u64).to_le_bytes());
    for v in features.as_slice() {
        h.update(v.to_le_bytes());
    }
    h.update(serde_json::to_vec(p).expect("graph parameters serialize"));
    h.update((n_eigs as u64).to_le_bytes());
    h.update(method.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode(d: &SpectralDecomposition) -> Vec<u8> {
    let (n, k) = (d.n(), d.n_eigs());
    let mut out = Vec::with_capacity(34 + 8 * k * (n + 1));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(match d.method {
        Method::Exact => 0,
        Method::Nystrom => 1,
    });
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(k as u64).to_le_bytes());
    for v in d.eigenvalues.iter().chain(d.eigenvectors.as_slice()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<SpectralDecomposition> {
    let bad = |m: &str| Error::Cache(m.to_string());
    if bytes.len() < 26 || &bytes[..8] != MAGIC {
        return Err(bad("not a spectral cache file"));
    }
    if bytes[8] != VERSION {
        return Err(Error::Cache(format!("unsupported cache version {}", bytes[8])));
    }
    let method = match bytes[9] {
        0 => Method::Exact,
        1 => Method::Nystrom,
        m => return Err(Error::Cache(format!("unknown method tag {m}"))),
    };
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let (n, k) = (word(10) as usize, word(18) as usize);
    let expected = k.checked_mul(n + 1).and_then(|c| c.checked_mul(8)).and_then(|c| c.checked_add(26));
    if expected != Some(bytes.len()) {
        return Err(bad("truncated or oversized cache file"));
    }
    let floats: Vec<f64> =
        bytes[26..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(SpectralDecomposition {
        eigenvalues: floats[..k].to_vec(),
        eigenvectors: DMatrix::from_column_slice(n, k, &floats[k..]),
        method,
    })
}

/// A directory of cache entries.
#[derive(Debug, Clone)]
pub struct SpectralCache {
    dir: PathBuf,
}

impl SpectralCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SpectralCache { dir: dir.into() }
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.spec"))
    }

    pub fn load(&self, key: &str) -> Result<Option<SpectralDecomposition>> {
        let path = self.path_for(key);
        match fs::read(&path) {
            Ok(bytes) => decode(&bytes).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    pub fn store(&self, key: &str, d: &SpectralDecomposition) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, encode(d)).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    /// Cached value for `key`, computing and storing it on a miss. Corrupt
    /// entries are recomputed.
    pub fn get_or_compute<F>(&self, key: &str, compute: F) -> Result<SpectralDecomposition>
    where
        F: FnOnce() -> Result<SpectralDecomposition>,
    {
        match self.load(key) {
            Ok(Some(d)) => return Ok(d),
            Ok(None) => {}
            Err(Error::Cache(msg)) => log::warn!("ignoring cache entry {key}: {msg}"),
            Err(e) => return Err(e),
        }
        let d = compute()?;
        self.store(key, &d)?;
        Ok(d)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
