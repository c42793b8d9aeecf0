//! Dataset and feature-matrix ingestion, feature standardization and
//! random labeled/unlabeled splits.
//!
//! Dataset CSV: UTF-8, header `smiles,label`, one molecule per line, labels
//! are non-negative integers. Feature CSV: no header, comma-separated decimal
//! floats, one row per molecule in dataset order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, TAG_SPLIT};

/// SMILES strings with integer class labels `0..n_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub smiles: Vec<String>,
    pub labels: Vec<usize>,
    n_classes: usize,
}

impl Dataset {
    pub fn new(name: impl Into<String>, smiles: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        if smiles.is_empty() {
            return Err(Error::InvalidParameter("dataset has no rows".into()));
        }
        if smiles.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!("{} SMILES but {} labels", smiles.len(), labels.len())));
        }
        let n_classes = (labels.iter().copied().max().unwrap_or(0) + 1).max(2);
        Ok(Dataset { name: name.into(), smiles, labels, n_classes })
    }

    pub fn len(&self) -> usize {
        self.smiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smiles.is_empty()
    }

    /// Number of classes `m`; at least 2.
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Reads a `smiles,label` CSV.
///
/// A class index with no members between 0 and the maximum label is logged
/// as a warning, not rejected.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut smiles = Vec::new();
    let mut labels = Vec::new();
    let mut saw_header = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if !saw_header {
            let header = line.trim_start_matches('\u{feff}').trim();
            if header != "smiles,label" {
                return Err(parse_err(path, line_no, format!("expected header `smiles,label`, found `{header}`")));
            }
            saw_header = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(smi), Some(label), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(path, line_no, "expected exactly two fields".into()));
        };
        let smi = smi.trim();
        if smi.is_empty() {
            return Err(parse_err(path, line_no, "empty SMILES field".into()));
        }
        let label: usize = label
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("label `{}` is not a non-negative integer", label.trim())))?;
        smiles.push(smi.to_string());
        labels.push(label);
    }

    if smiles.is_empty() {
        return Err(Error::EmptyDataset(path.to_path_buf()));
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ds = Dataset::new(name, smiles, labels)?;
    for (class, count) in ds.class_counts().iter().enumerate() {
        if *count == 0 {
            log::warn!("{}: class {class} has no members", path.display());
        }
    }
    Ok(ds)
}

pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "smiles,label").map_err(io)?;
    for (s, l) in ds.smiles.iter().zip(&ds.labels) {
        writeln!(w, "{s},{l}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn parse_err(path: &Path, line: usize, message: String) -> Error {
    Error::Parse { path: PathBuf::from(path), line, message }
}

/// Dense row-major `N x D` matrix of per-molecule features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    pub standardized: bool,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::ShapeMismatch("ragged feature rows".into()));
        }
        Self::from_row_major(rows.iter().flatten().copied().collect(), rows.len(), n_cols)
    }

    pub fn from_row_major(values: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::ShapeMismatch("feature matrix must be non-empty".into()));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::ShapeMismatch(format!("{} values do not fill {n_rows}x{n_cols}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("feature matrix has non-finite entries".into()));
        }
        Ok(FeatureMatrix { values, n_rows, n_cols, standardized: false })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// True when every entry is exactly 0 or 1 (fingerprint bits).
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Rows selected by `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix { values, n_rows: indices.len(), n_cols: self.n_cols, standardized: self.standardized }
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> FeatureMatrix {
        FeatureMatrix { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }
}

/// Reads a headerless numeric CSV with exactly `expected_rows` rows.
pub fn load_feature_matrix(path: impl AsRef<Path>, expected_rows: usize) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut values = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line_no, format!("non-numeric cell `{}`", cell.trim())))?;
            if !v.is_finite() {
                return Err(parse_err(path, line_no, format!("non-finite cell `{}`", cell.trim())));
            }
            values.push(v);
        }
        let width = values.len() - before;
        match n_cols {
            None => n_cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_err(path, line_no, format!("ragged row: {width} columns, expected {c}")))
            }
            _ => {}
        }
        n_rows += 1;
    }
    if n_rows != expected_rows {
        return Err(Error::RowCountMismatch { expected: expected_rows, found: n_rows });
    }
    FeatureMatrix::from_row_major(values, n_rows, n_cols.unwrap_or(0))
}

pub fn write_feature_matrix(f: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let binary = f.is_binary();
    let mut line = String::new();
    for i in 0..f.n_rows() {
        line.clear();
        for (j, v) in f.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            if binary {
                line.push(if *v == 1.0 { '1' } else { '0' });
            } else {
                // `{:?}` is the shortest representation that round-trips.
                line.push_str(&format!("{v:?}"));
            }
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Centers every column and scales it to unit population standard
/// deviation (denominator `N`). Constant columns become all zeros.
pub fn standardize_features(f: &FeatureMatrix) -> FeatureMatrix {
    let (n, d) = (f.n_rows(), f.n_cols());
    let mut out = f.values.clone();
    for j in 0..d {
        let mean = (0..n).map(|i| f.get(i, j)).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (f.get(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        // Columns whose spread is pure round-off are treated as constant.
        let constant = std <= 1e-12 * mean.abs().max(1.0);
        for i in 0..n {
            out[i * d + j] = if constant { 0.0 } else { (f.get(i, j) - mean) / std };
        }
    }
    FeatureMatrix { values: out, n_rows: n, n_cols: d, standardized: true }
}

/// One labeled/unlabeled partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    /// `gamma[i]` is true when point `i` is labeled.
    pub gamma: Vec<bool>,
    pub labeled_count: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn from_labeled(n: usize, labeled: &[usize], seed: u64) -> Result<Self> {
        let mut gamma = vec![false; n];
        for &i in labeled {
            if i >= n || gamma[i] {
                return Err(Error::InvalidParameter(format!("bad labeled index {i}")));
            }
            gamma[i] = true;
        }
        Ok(SplitSpec { gamma, labeled_count: labeled.len(), seed })
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.gamma.len()).filter(|&i| self.gamma[i]).collect()
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        (0..self.gamma.len()).filter(|&i| !self.gamma[i]).collect()
    }
}

/// `ceil(fraction * n)`, clamped to at least one labeled point.
pub fn labeled_count_for_fraction(n: usize, fraction: f64) -> usize {
    // Guard against 0.05 * 100 evaluating to 5.000000000000001.
    let raw = fraction * n as f64;
    let rounded = raw.round();
    let count = if (raw - rounded).abs() < 1e-9 { rounded } else { raw.ceil() };
    (count as usize).max(1)
}

/// `num_splits` uniformly random labeled sets of size `labeled_count`.
///
/// Split `k` draws its indices from a ChaCha8 stream seeded with
/// `derive_seed(seed, TAG_SPLIT, k)`, so the list is a pure function of the
/// arguments.
pub fn generate_splits(n: usize, labeled_count: usize, num_splits: usize, seed: u64) -> Result<Vec<SplitSpec>> {
    check_split_args(n, labeled_count, num_splits)?;
    (0..num_splits)
        .map(|k| {
            let split_seed = derive_seed(seed, TAG_SPLIT, k as u64);
            let mut rng = rng_from_seed(split_seed);
            let picked = index::sample(&mut rng, n, labeled_count).into_vec();
            SplitSpec::from_labeled(n, &picked, split_seed)
        })
        .collect()
}

/// Like [`generate_splits`], but allocates the labeled budget across
/// classes in proportion to class size (largest remainder), keeping at least
/// one labeled point per non-empty class when the budget allows.
pub fn generate_stratified_splits(
    labels: &[usize],
    labeled_count: usize,
    num_splits: usize,
    seed: u64,
) -> Result<Vec<SplitSpec>> {
    let n = labels.len();
    check_split_args(n, labeled_count, num_splits)?;
    let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let quotas = stratified_quotas(&members, labeled_count);
    (0..num_splits)
        .map(|k| {
            let split_seed = derive_seed(seed, TAG_SPLIT, k as u64);
            let mut rng = rng_from_seed(split_seed);
            let mut picked = Vec::with_capacity(labeled_count);
            for (class_members, &q) in members.iter().zip(&quotas) {
                for j in index::sample(&mut rng, class_members.len(), q).into_iter() {
                    picked.push(class_members[j]);
                }
            }
            SplitSpec::from_labeled(n, &picked, split_seed)
        })
        .collect()
}

fn stratified_quotas(members: &[Vec<usize>], budget: usize) -> Vec<usize> {
    let n: usize = members.iter().map(Vec::len).sum();
    let non_empty = members.iter().filter(|m| !m.is_empty()).count();
    let mut quotas = vec![0usize; members.len()];
    let mut remaining = budget;
    if budget >= non_empty {
        for (q, m) in quotas.iter_mut().zip(members) {
            if !m.is_empty() {
                *q = 1;
                remaining -= 1;
            }
        }
    }
    let exact: Vec<f64> = members.iter().map(|m| remaining as f64 * m.len() as f64 / n as f64).collect();
    for (q, (e, m)) in quotas.iter_mut().zip(exact.iter().zip(members)) {
        let add = (e.floor() as usize).min(m.len() - (*q).min(m.len()));
        *q += add;
    }
    let mut left = budget - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    while left > 0 {
        let mut progressed = false;
        for &c in &order {
            if left > 0 && quotas[c] < members[c].len() {
                quotas[c] += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    quotas
}

fn check_split_args(n: usize, labeled_count: usize, num_splits: usize) -> Result<()> {
    if labeled_count == 0 || labeled_count >= n {
        return Err(Error::InvalidParameter(format!(
            "labeled_count must satisfy 1 <= labeled_count < n (got {labeled_count}, n = {n})"
        )));
    }
    if num_splits == 0 {
        return Err(Error::InvalidParameter("num_splits must be at least 1".into()));
    }
    Ok(())
}
