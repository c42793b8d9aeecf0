//! k-nearest-neighbor similarity graphs with Gaussian weights and their
//! Laplacians.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::FeatureMatrix;
use crate::distance::{Distances, Metric};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Bandwidth of the Gaussian weight `exp(-d^2 / sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scaling {
    /// `sigma^2 = sigma_i * sigma_j`, with `sigma_i` the distance from `i`
    /// to its `k_sigma`-th nearest neighbor.
    Local {
        k_sigma: usize,
    },
    Global {
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `L = D - W`
    #[default]
    Unnormalized,
    /// `L = I - D^{-1/2} W D^{-1/2}`
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub n_neighbors: usize,
    pub metric: Metric,
    pub scaling: Scaling,
    pub normalization: Normalization,
}

impl GraphParams {
    /// Euclidean metric, local scaling with `k_sigma = ceil(n_neighbors / 2)`,
    /// unnormalized Laplacian.
    pub fn new(n_neighbors: usize) -> Self {
        GraphParams {
            n_neighbors,
            metric: Metric::Euclidean,
            scaling: Scaling::Local { k_sigma: n_neighbors.div_ceil(2).max(1) },
            normalization: Normalization::Unnormalized,
        }
    }

    pub fn with_global_sigma(mut self, sigma: f64) -> Self {
        self.scaling = Scaling::Global { sigma };
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidParameter("graph needs at least two points".into()));
        }
        if self.n_neighbors == 0 || self.n_neighbors >= n {
            return Err(Error::InvalidParameter(format!(
                "n_neighbors must satisfy 1 <= n_neighbors < N (got {}, N = {n})",
                self.n_neighbors
            )));
        }
        match self.scaling {
            Scaling::Local { k_sigma } if k_sigma == 0 || k_sigma > self.n_neighbors => Err(Error::InvalidParameter(
                format!("k_sigma must satisfy 1 <= k_sigma <= n_neighbors (got {k_sigma})"),
            )),
            Scaling::Global { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")))
            }
            _ => Ok(()),
        }
    }
}

/// Symmetric weight matrix `W`, degrees `D` and Laplacian `L`.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    pub weights: CsrMatrix,
    pub degrees: Vec<f64>,
    pub laplacian: CsrMatrix,
    pub normalization: Normalization,
}

impl SimilarityGraph {
    pub fn from_weights(weights: CsrMatrix, normalization: Normalization) -> Self {
        let degrees = (0..weights.n()).map(|i| weights.row_sum(i)).collect();
        let laplacian = laplacian(&weights, normalization);
        SimilarityGraph { weights, degrees, laplacian, normalization }
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    /// Writes `i,j,weight` lines (0-based) for every stored entry of `W`.
    pub fn write_weights(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        for (i, j, v) in self.weights.triplets() {
            writeln!(w, "{i},{j},{v:?}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// The `k` nearest other points of every row, ascending by distance with
/// ties broken by index.
pub fn nearest_neighbors(dist: &Distances<'_>, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = dist.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(usize, f64)> = (0..n).filter(|&j| j != i).map(|j| (j, dist.distance(i, j))).collect();
            let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, cmp);
                cand.truncate(k);
            }
            cand.sort_unstable_by(cmp);
            cand
        })
        .collect()
}

/// Gaussian k-NN graph, symmetrized as `(W + W^T) / 2` over the union of
/// directed edges.
pub fn knn_graph(features: &FeatureMatrix, p: &GraphParams) -> Result<SimilarityGraph> {
    let n = features.n_rows();
    p.validate(n)?;
    let dist = Distances::new(features, p.metric);
    let neighbors = nearest_neighbors(&dist, p.n_neighbors);

    if neighbors.iter().all(|nb| nb.iter().all(|&(_, d)| d == 0.0)) {
        log::warn!("all feature rows are identical; the graph is a clique of unit weights");
    }

    let sigma = match p.scaling {
        Scaling::Local { k_sigma } => {
            let raw: Vec<f64> = neighbors.iter().map(|nb| nb[k_sigma - 1].1).collect();
            local_sigmas(raw)
        }
        Scaling::Global { sigma } => vec![sigma; n],
    };

    let mut triplets = Vec::with_capacity(2 * n * p.n_neighbors);
    for (i, nb) in neighbors.iter().enumerate() {
        for &(j, d) in nb {
            let w = gaussian_weight(d, sigma[i] * sigma[j]);
            triplets.push((i, j, 0.5 * w));
            triplets.push((j, i, 0.5 * w));
        }
    }
    let weights = CsrMatrix::from_triplets(n, triplets);
    Ok(SimilarityGraph::from_weights(weights, p.normalization))
}

/// Zero bandwidths (duplicate points) are replaced by the mean positive one.
pub(crate) fn local_sigmas(mut raw: Vec<f64>) -> Vec<f64> {
    let positive: Vec<f64> = raw.iter().copied().filter(|&s| s > 0.0).collect();
    let fill = if positive.is_empty() { 1.0 } else { positive.iter().sum::<f64>() / positive.len() as f64 };
    for s in &mut raw {
        if *s <= 0.0 {
            *s = fill;
        }
    }
    raw
}

/// `exp(-d^2 / sigma_sq)`, kept strictly positive so that every k-NN edge
/// survives underflow.
pub fn gaussian_weight(d: f64, sigma_sq: f64) -> f64 {
    if d == 0.0 {
        return 1.0;
    }
    (-(d * d) / sigma_sq).exp().max(f64::MIN_POSITIVE)
}

/// Graph Laplacian of a symmetric weight matrix.
///
/// Rows of zero-degree vertices are all zero in both normalizations.
pub fn laplacian(weights: &CsrMatrix, normalization: Normalization) -> CsrMatrix {
    let n = weights.n();
    let degrees: Vec<f64> = (0..n).map(|i| weights.row_sum(i)).collect();
    let mut triplets = Vec::with_capacity(weights.nnz() + n);
    match normalization {
        Normalization::Unnormalized => {
            for (i, j, w) in weights.triplets() {
                if i != j {
                    triplets.push((i, j, -w));
                }
            }
            for (i, &d) in degrees.iter().enumerate() {
                let diag = d - weights.get(i, i);
                if diag != 0.0 {
                    triplets.push((i, i, diag));
                }
            }
        }
        Normalization::Symmetric => {
            let inv_sqrt: Vec<f64> = degrees.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
            for (i, j, w) in weights.triplets() {
                triplets.push((i, j, -w * inv_sqrt[i] * inv_sqrt[j]));
            }
            for (i, &d) in degrees.iter().enumerate() {
                if d > 0.0 {
                    triplets.push((i, i, 1.0));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, triplets)
}
