//! Leading (smallest) eigenpairs of graph Laplacians.
//!
//! Small problems (`N <= 500`) use a dense symmetric eigensolver. Larger
//! ones use thick-restart Lanczos on the sparse Laplacian, after deflating
//! the kernel, which is known exactly from the connected components: the
//! normalized component indicators for `D - W`, and `D^{1/2}` times them for
//! the symmetric normalization.
//!
//! Columns are sign-canonicalized (largest-magnitude entry positive) and
//! round-off negative eigenvalues are clamped to zero.

pub mod cache;
mod lanczos;
pub mod nystrom;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Normalization, SimilarityGraph};
use crate::rng::{rng_from_seed, TAG_EIGEN};
use crate::sparse::CsrMatrix;

pub use lanczos::LanczosOptions;
pub use nystrom::{nystrom, NystromInfo};

/// Problems at or below this size are solved densely.
pub const DENSE_CUTOFF: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Nystrom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Ascending and non-negative.
    pub eigenvalues: Vec<f64>,
    /// `N x N_e`, orthonormal columns.
    pub eigenvectors: DMatrix<f64>,
    pub method: Method,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn n_eigs(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The leading `k` pairs.
    pub fn truncated(&self, k: usize) -> SpectralDecomposition {
        let k = k.min(self.n_eigs());
        SpectralDecomposition {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors.columns(0, k).clone_owned(),
            method: self.method,
        }
    }

    /// `max |L Phi - Phi Lambda|`.
    pub fn residual(&self, l: &CsrMatrix) -> f64 {
        let n = self.n();
        let mut out = vec![0.0; n];
        let mut worst: f64 = 0.0;
        for (c, &lambda) in self.eigenvalues.iter().enumerate() {
            let col = self.eigenvectors.column(c);
            l.mul_vec(col.as_slice(), &mut out);
            for i in 0..n {
                worst = worst.max((out[i] - lambda * col[i]).abs());
            }
        }
        worst
    }

    /// `max |Phi^T Phi - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.eigenvectors.tr_mul(&self.eigenvectors);
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Smallest `n_eigs` eigenpairs of a graph Laplacian.
pub fn eigendecompose(l: &CsrMatrix, n_eigs: usize) -> Result<SpectralDecomposition> {
    eigendecompose_with(l, n_eigs, None, &LanczosOptions::default())
}

/// Smallest eigenpairs of the Laplacian stored in `g`, deflating its known
/// kernel on the iterative path.
pub fn decompose_graph(g: &SimilarityGraph, n_eigs: usize) -> Result<SpectralDecomposition> {
    let kernel = kernel_basis(&g.weights, g.normalization);
    eigendecompose_with(&g.laplacian, n_eigs, Some(kernel), &LanczosOptions::default())
}

pub fn eigendecompose_with(
    l: &CsrMatrix,
    n_eigs: usize,
    kernel: Option<DMatrix<f64>>,
    opts: &LanczosOptions,
) -> Result<SpectralDecomposition> {
    let n = l.n();
    if n_eigs == 0 || n_eigs > n {
        return Err(Error::InvalidParameter(format!("n_eigs must satisfy 1 <= n_eigs <= N (got {n_eigs}, N = {n})")));
    }
    let (values, vectors) = if n <= DENSE_CUTOFF {
        dense_smallest(&l.to_dense(), n_eigs)
    } else {
        let kernel = kernel.unwrap_or_else(|| DMatrix::zeros(n, 0));
        let fixed = kernel.ncols().min(n_eigs);
        let mut rng = rng_from_seed(crate::rng::derive_seed(0, TAG_EIGEN, n as u64));
        let (mut values, rest) = lanczos::smallest_eigenpairs(
            l,
            n_eigs - fixed,
            &kernel.columns(0, kernel.ncols()).clone_owned(),
            opts,
            &mut rng,
        )?;
        let mut vectors = DMatrix::zeros(n, n_eigs);
        vectors.columns_mut(0, fixed).copy_from(&kernel.columns(0, fixed));
        vectors.columns_mut(fixed, n_eigs - fixed).copy_from(&rest);
        let mut all = vec![0.0; fixed];
        all.append(&mut values);
        (all, vectors)
    };
    Ok(finalize(values, vectors, Method::Exact))
}

fn dense_smallest(m: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut vectors = DMatrix::zeros(m.nrows(), k);
    for (dst, &src) in order[..k].iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (order[..k].iter().map(|&c| eig.eigenvalues[c]).collect(), vectors)
}

/// Sorts ascending, clamps negatives and fixes column signs.
pub(crate) fn finalize(values: Vec<f64>, vectors: DMatrix<f64>, method: Method) -> SpectralDecomposition {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut eigenvectors = DMatrix::zeros(vectors.nrows(), values.len());
    let mut eigenvalues = Vec::with_capacity(values.len());
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).clone_owned();
        let pivot =
            col.iter().enumerate().fold(
                (0, 0.0f64),
                |best, (i, &v)| {
                    if v.abs() > best.1.abs() + 1e-12 {
                        (i, v)
                    } else {
                        best
                    }
                },
            );
        if pivot.1 < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
        eigenvalues.push(values[src].max(0.0));
    }
    SpectralDecomposition { eigenvalues, eigenvectors, method }
}

/// Connected components of the graph with weights `w` (labels in order of
/// first appearance).
pub fn connected_components(w: &CsrMatrix) -> Vec<usize> {
    let n = w.n();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for (u, weight) in w.row(v) {
                if weight != 0.0 && label[u] == usize::MAX {
                    label[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    label
}

/// Orthonormal basis of the Laplacian kernel, one column per component.
pub fn kernel_basis(w: &CsrMatrix, normalization: Normalization) -> DMatrix<f64> {
    let n = w.n();
    let comp = connected_components(w);
    let n_comp = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut basis = DMatrix::zeros(n, n_comp);
    for i in 0..n {
        let deg = w.row_sum(i);
        let entry = match normalization {
            Normalization::Unnormalized => 1.0,
            // isolated vertices have a zero row, so e_i spans their kernel
            Normalization::Symmetric if deg > 0.0 => deg.sqrt(),
            Normalization::Symmetric => 1.0,
        };
        basis[(i, comp[i])] = entry;
    }
    for mut col in basis.column_iter_mut() {
        let norm = col.norm();
        col /= norm;
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::laplacian;

    #[test]
    fn two_node_path() {
        let w = CsrMatrix::from_triplets(2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        let l = laplacian(&w, Normalization::Unnormalized);
        let d = eigendecompose(&l, 2).unwrap();
        assert!(d.eigenvalues[0].abs() < 1e-14);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = d.eigenvectors.column(0);
        let v1 = d.eigenvectors.column(1);
        assert!((v0[0].abs() - s).abs() < 1e-14 && (v0[1] - v0[0]).abs() < 1e-14);
        assert!((v1[0].abs() - s).abs() < 1e-14 && (v1[1] + v1[0]).abs() < 1e-14);
    }

    #[test]
    fn component_count_matches_zero_eigenvalues() {
        let w = CsrMatrix::from_triplets(4, vec![(0, 1, 1.0), (1, 0, 1.0), (2, 3, 0.5), (3, 2, 0.5)]);
        let l = laplacian(&w, Normalization::Unnormalized);
        let d = eigendecompose(&l, 2).unwrap();
        assert_eq!(d.eigenvalues, vec![0.0, 0.0]);
        assert_eq!(connected_components(&w), vec![0, 0, 1, 1]);
    }

    #[test]
    fn rejects_bad_counts() {
        let w = CsrMatrix::from_triplets(2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        let l = laplacian(&w, Normalization::Unnormalized);
        assert!(eigendecompose(&l, 0).is_err());
        assert!(eigendecompose(&l, 3).is_err());
    }

    #[test]
    fn sign_convention() {
        let v = DMatrix::from_column_slice(3, 1, &[0.1, -0.9, 0.2]);
        let d = finalize(vec![-1e-17], v, Method::Exact);
        assert_eq!(d.eigenvalues, vec![0.0]);
        assert!(d.eigenvectors[(1, 0)] > 0.0);
    }
}
