//! One-shot Nyström approximation of the symmetric-normalized Gaussian
//! kernel operator from a uniformly sampled landmark set.
//!
//! With landmark block `A` (s x s, unit diagonal) and landmark-to-rest block
//! `B`, degrees are estimated as `d_X = A1 + B1` and
//! `d_Y = B^T 1 + B^T A^+ B 1`. After normalizing both blocks,
//! `Q = A + A^{-1/2} B B^T A^{-1/2}` is diagonalized as `U Lambda U^T` and the
//! approximate kernel eigenvectors are `[A; B^T] A^{-1/2} U Lambda^{-1/2}`.
//! The Laplacian eigenvalues are `1 - Lambda`.
//!
//! The columns are then orthonormalized and a Rayleigh-Ritz step on the
//! implied low-rank kernel restores an exact eigenbasis of that kernel.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample;
use rayon::prelude::*;

use super::{finalize, Method, SpectralDecomposition};
use crate::dataio::FeatureMatrix;
use crate::distance::Distances;
use crate::error::{Error, Result};
use crate::graph::{gaussian_weight, GraphParams, Scaling};
use crate::rng::{derive_seed, rng_from_seed, TAG_LANDMARKS};

/// Eigenvalues of the normalized landmark block below this fraction of the
/// largest are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NystromInfo {
    /// Sorted landmark indices.
    pub landmarks: Vec<usize>,
    pub sigma: f64,
    /// Condition estimate of the normalized landmark block.
    pub condition: f64,
    /// Numerical rank retained from the landmark block.
    pub rank: usize,
}

pub fn nystrom(
    features: &FeatureMatrix,
    n_eigs: usize,
    sample_size: usize,
    p: &GraphParams,
    seed: u64,
) -> Result<SpectralDecomposition> {
    nystrom_with_info(features, n_eigs, sample_size, p, seed).map(|(d, _)| d)
}

pub fn nystrom_with_info(
    features: &FeatureMatrix,
    n_eigs: usize,
    sample_size: usize,
    p: &GraphParams,
    seed: u64,
) -> Result<(SpectralDecomposition, NystromInfo)> {
    let n = features.n_rows();
    if n_eigs == 0 || n_eigs > sample_size || sample_size > n {
        return Err(Error::InvalidParameter(format!(
            "nystrom needs 1 <= n_eigs <= sample_size <= N (got n_eigs = {n_eigs}, \
             sample_size = {sample_size}, N = {n})"
        )));
    }
    if sample_size < 2 {
        return Err(Error::InvalidParameter("sample_size must be at least 2".into()));
    }
    let s = sample_size;
    let mut rng = rng_from_seed(derive_seed(seed, TAG_LANDMARKS, 0));
    let mut landmarks = sample(&mut rng, n, s).into_vec();
    landmarks.sort_unstable();
    let mut is_landmark = vec![false; n];
    for &i in &landmarks {
        is_landmark[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !is_landmark[i]).collect();

    let dist = Distances::new(features, p.metric);
    let sigma = landmark_sigma(&dist, &landmarks, p, n)?;
    let sigma_sq = sigma * sigma;

    let a = DMatrix::from_fn(s, s, |i, j| gaussian_weight(dist.distance(landmarks[i], landmarks[j]), sigma_sq));
    let b_cols: Vec<Vec<f64>> = rest
        .par_iter()
        .map(|&r| landmarks.iter().map(|&l| gaussian_weight(dist.distance(l, r), sigma_sq)).collect())
        .collect();
    let m = rest.len();
    let mut b = DMatrix::zeros(s, m);
    for (c, col) in b_cols.iter().enumerate() {
        b.column_mut(c).copy_from_slice(col);
    }

    // degree estimates
    let b_row_sums = b.column_sum();
    let d_x: DVector<f64> = a.column_sum() + &b_row_sums;
    let a_pinv = pseudo_inverse(&a);
    let d_y: DVector<f64> = b.tr_mul(&DVector::from_element(s, 1.0)) + b.tr_mul(&(a_pinv * &b_row_sums));
    let inv_sqrt = |d: f64| {
        if d > 0.0 {
            1.0 / d.sqrt()
        } else {
            log::warn!("non-positive Nyström degree estimate {d}; treating as isolated");
            0.0
        }
    };
    let sx: Vec<f64> = d_x.iter().map(|&d| inv_sqrt(d)).collect();
    let sy: Vec<f64> = d_y.iter().map(|&d| inv_sqrt(d)).collect();
    let a_n = DMatrix::from_fn(s, s, |i, j| a[(i, j)] * sx[i] * sx[j]);
    let b_n = DMatrix::from_fn(s, m, |i, j| b[(i, j)] * sx[i] * sy[j]);

    // A_n^{-1/2} on its numerically nonsingular part
    let eig_a = SymmetricEigen::new(a_n.clone());
    let top = eig_a.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s).filter(|&k| eig_a.eigenvalues[k] > RANK_TOL * top).collect();
    let bottom = keep.iter().map(|&k| eig_a.eigenvalues[k]).fold(f64::INFINITY, f64::min);
    let condition = if keep.len() < s { f64::INFINITY } else { top / bottom };
    if keep.len() < n_eigs {
        return Err(Error::IllConditioned { condition });
    }
    let mut a_isqrt = DMatrix::zeros(s, s);
    for &k in &keep {
        let u = eig_a.eigenvectors.column(k);
        a_isqrt += (u * u.transpose()) / eig_a.eigenvalues[k].sqrt();
    }

    let proj = &a_isqrt * &b_n;
    let q = &a_n + &proj * proj.transpose();
    let q = 0.5 * (&q + q.transpose());
    let eig_q = SymmetricEigen::new(q);
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&x, &y| eig_q.eigenvalues[y].total_cmp(&eig_q.eigenvalues[x]).then(x.cmp(&y)));
    let order = &order[..n_eigs];
    if let Some(&c) = order.iter().find(|&&c| eig_q.eigenvalues[c] <= RANK_TOL) {
        log::debug!("Nyström eigenvalue {} is not positive", eig_q.eigenvalues[c]);
        return Err(Error::IllConditioned { condition });
    }

    let mut coeff = DMatrix::zeros(s, n_eigs);
    let mut lambda = Vec::with_capacity(n_eigs);
    for (dst, &c) in order.iter().enumerate() {
        let l = eig_q.eigenvalues[c];
        coeff.set_column(dst, &(&a_isqrt * eig_q.eigenvectors.column(c) / l.sqrt()));
        lambda.push(l);
    }
    let top_rows = &a_n * &coeff;
    let bottom_rows = b_n.tr_mul(&coeff);
    let mut v = DMatrix::zeros(n, n_eigs);
    for (k, &i) in landmarks.iter().enumerate() {
        v.set_row(i, &top_rows.row(k));
    }
    for (k, &i) in rest.iter().enumerate() {
        v.set_row(i, &bottom_rows.row(k));
    }

    // Rayleigh-Ritz on the implied kernel V diag(lambda) V^T
    let qr = v.qr();
    let (q_v, r) = (qr.q(), qr.r());
    let lam = DMatrix::from_diagonal(&DVector::from_vec(lambda));
    let small = &r * lam * r.transpose();
    let small = 0.5 * (&small + small.transpose());
    let eig_s = SymmetricEigen::new(small);
    let vectors = q_v * &eig_s.eigenvectors;
    let values: Vec<f64> = eig_s.eigenvalues.iter().map(|&mu| 1.0 - mu).collect();

    let info = NystromInfo { landmarks, sigma, condition, rank: keep.len() };
    Ok((finalize(values, vectors, Method::Nystrom), info))
}

/// Global bandwidth for the dense landmark kernel: the configured value, or
/// the mean distance from each landmark to its `k_l`-th nearest other
/// landmark with `k_l = ceil(k_sigma * s / N)` clamped to `[1, s - 1]`.
fn landmark_sigma(dist: &Distances<'_>, landmarks: &[usize], p: &GraphParams, n: usize) -> Result<f64> {
    match p.scaling {
        Scaling::Global { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(sigma),
        Scaling::Global { sigma } => Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}"))),
        Scaling::Local { k_sigma } => {
            let s = landmarks.len();
            let k = (k_sigma * s).div_ceil(n).clamp(1, s - 1);
            let raw: Vec<f64> = landmarks
                .par_iter()
                .map(|&i| {
                    let mut d: Vec<f64> = landmarks.iter().filter(|&&j| j != i).map(|&j| dist.distance(i, j)).collect();
                    d.select_nth_unstable_by(k - 1, f64::total_cmp);
                    d[k - 1]
                })
                .collect();
            let positive: Vec<f64> = raw.into_iter().filter(|&x| x > 0.0).collect();
            Ok(if positive.is_empty() { 1.0 } else { positive.iter().sum::<f64>() / positive.len() as f64 })
        }
    }
}

fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (k, &mu) in eig.eigenvalues.iter().enumerate() {
        if mu > RANK_TOL * top {
            let u = eig.eigenvectors.column(k);
            out += (u * u.transpose()) / mu;
        }
    }
    out
}

/// Dense symmetric-normalized Laplacian `I - D^{-1/2} K D^{-1/2}` of the full
/// Gaussian kernel `K` (unit diagonal) with a global bandwidth; the operator
/// that Nyström approximates.
pub fn full_kernel_laplacian(features: &FeatureMatrix, p: &GraphParams, sigma: f64) -> DMatrix<f64> {
    let n = features.n_rows();
    let dist = Distances::new(features, p.metric);
    let k = DMatrix::from_fn(n, n, |i, j| gaussian_weight(dist.distance(i, j), sigma * sigma));
    let d: Vec<f64> = k.column_sum().iter().map(|&x| 1.0 / x.sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - k[(i, j)] * d[i] * d[j]
    })
}
