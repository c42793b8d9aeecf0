//! Folded extended-connectivity fingerprints (ECFP).
//!
//! Every heavy atom starts from a hash of its invariant tuple
//! `(atomic number, heavy degree, total H, formal charge, in-ring,
//! aromatic, isotope or 0)`. Each round replaces an atom's identifier with
//! `hash(round, own id, sorted [(bond code, neighbor id)])`. The feature set
//! is the union of all identifiers seen (duplicates collapse by set
//! semantics), and bit `id mod n_bits` is set for each feature.
//!
//! The hash is FNV-1a (64-bit) over the little-endian field encoding,
//! followed by the MurmurHash3 `fmix64` finalizer so that low bits, which
//! decide the folded position, are well mixed. Nothing depends on process
//! state, so fingerprints are identical across runs and platforms.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dataio::FeatureMatrix;
use crate::error::{Error, Result};
use crate::smiles::{parse_smiles, MolecularGraph};

/// Diameter `d` (twice the number of update rounds) and folding length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct EcfpParams {
    pub diameter: u32,
    pub n_bits: usize,
}

impl EcfpParams {
    pub fn new(diameter: u32, n_bits: usize) -> Result<Self> {
        if !diameter.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("ECFP diameter must be even, got {diameter}")));
        }
        if !n_bits.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("n_bits must be a power of two, got {n_bits}")));
        }
        Ok(EcfpParams { diameter, n_bits })
    }

    pub fn iterations(&self) -> u32 {
        self.diameter / 2
    }
}

impl fmt::Display for EcfpParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ECFP{}_{}", self.diameter, self.n_bits)
    }
}

/// Parses names such as `ECFP4_1024`.
impl FromStr for EcfpParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected a name like ECFP4_1024, got `{s}`"));
        let rest = s.strip_prefix("ECFP").or_else(|| s.strip_prefix("ecfp")).ok_or_else(bad)?;
        let (d, bits) = rest.split_once('_').ok_or_else(bad)?;
        EcfpParams::new(d.parse().map_err(|_| bad())?, bits.parse().map_err(|_| bad())?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    words: Vec<u64>,
    n_bits: usize,
    /// Pre-fold feature identifiers.
    pub feature_ids: BTreeSet<u64>,
}

impl Fingerprint {
    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn is_set(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn set_bits(&self) -> Vec<usize> {
        (0..self.n_bits).filter(|&b| self.is_set(b)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_row(&self) -> Vec<f64> {
        (0..self.n_bits).map(|b| if self.is_set(b) { 1.0 } else { 0.0 }).collect()
    }
}

struct Hasher(u64);

impl Hasher {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    fn new() -> Self {
        Hasher(Self::OFFSET)
    }

    fn bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    fn u8(&mut self, v: u8) {
        self.bytes(&[v]);
    }

    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    fn i32(&mut self, v: i32) {
        self.bytes(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    fn finish(&self) -> u64 {
        let mut h = self.0;
        h ^= h >> 33;
        h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
        h ^= h >> 33;
        h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
        h ^ (h >> 33)
    }
}

/// One identifier per heavy atom from its invariant tuple.
pub fn initial_identifiers(g: &MolecularGraph) -> Vec<u64> {
    g.atoms
        .iter()
        .map(|a| {
            let mut h = Hasher::new();
            h.u32(u32::from(a.element));
            h.u32(a.degree as u32);
            h.u32(a.total_h());
            h.i32(a.charge);
            h.u8(u8::from(a.in_ring));
            h.u8(u8::from(a.aromatic));
            h.u32(a.isotope.unwrap_or(0));
            h.finish()
        })
        .collect()
}

/// Identifiers after each round: element 0 is the initial assignment,
/// element `r` the result of round `r`.
pub fn identifier_rounds(g: &MolecularGraph, iterations: u32) -> Vec<Vec<u64>> {
    let mut rounds = Vec::with_capacity(iterations as usize + 1);
    rounds.push(initial_identifiers(g));
    let mut env: Vec<(u8, u64)> = Vec::new();
    for r in 1..=iterations {
        let prev = rounds.last().expect("initial round present");
        let next = (0..g.atom_count())
            .map(|i| {
                env.clear();
                env.extend(g.adjacency[i].iter().map(|&(n, bi)| (g.bonds[bi].order.code(), prev[n])));
                env.sort_unstable();
                let mut h = Hasher::new();
                h.u32(r);
                h.u64(prev[i]);
                h.u32(env.len() as u32);
                for &(code, id) in &env {
                    h.u8(code);
                    h.u64(id);
                }
                h.finish()
            })
            .collect();
        rounds.push(next);
    }
    rounds
}

/// Sets bit `id mod n_bits` for each identifier.
pub fn fold(ids: &BTreeSet<u64>, n_bits: usize) -> Vec<bool> {
    assert!(n_bits > 0, "n_bits must be positive");
    let mut bits = vec![false; n_bits];
    for &id in ids {
        bits[(id % n_bits as u64) as usize] = true;
    }
    bits
}

pub fn ecfp(g: &MolecularGraph, p: &EcfpParams) -> Fingerprint {
    let feature_ids: BTreeSet<u64> = identifier_rounds(g, p.iterations()).into_iter().flatten().collect();
    let mut words = vec![0u64; p.n_bits.div_ceil(64)];
    for (bit, set) in fold(&feature_ids, p.n_bits).into_iter().enumerate() {
        if set {
            words[bit / 64] |= 1 << (bit % 64);
        }
    }
    Fingerprint { words, n_bits: p.n_bits, feature_ids }
}

pub fn ecfp_from_smiles(smiles: &str, p: &EcfpParams) -> Result<Fingerprint> {
    Ok(ecfp(&parse_smiles(smiles)?, p))
}

/// `N x n_bits` 0/1 matrix for a list of SMILES. The first parse failure is
/// reported with its row index.
pub fn fingerprint_matrix(smiles: &[String], p: &EcfpParams) -> Result<FeatureMatrix> {
    let rows: Vec<Fingerprint> = smiles
        .par_iter()
        .enumerate()
        .map(|(i, s)| ecfp_from_smiles(s, p).map_err(|e| Error::Config(format!("molecule {i} (`{s}`): {e}"))))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(rows.len() * p.n_bits);
    for fp in &rows {
        values.extend(fp.to_row());
    }
    FeatureMatrix::from_row_major(values, rows.len(), p.n_bits)
}
