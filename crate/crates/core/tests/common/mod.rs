//! Synthetic data shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use scarcemol::dataio::FeatureMatrix;
use scarcemol::rng::rng_from_seed;

/// Standard normal draw (Box-Muller).
pub fn normal(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// `n_per` points around each of the two centers `(0, .., 0)` and
/// `(separation, 0, .., 0)`, unit variance, class = cluster.
pub fn two_gaussians(n_per: usize, dim: usize, separation: f64, seed: u64) -> (FeatureMatrix, Vec<usize>) {
    gaussian_blobs(n_per, 2, dim, separation, seed)
}

/// `n_per` unit-variance points per class; class 0 sits at the origin and
/// class `k > 0` is shifted by `separation` along axis `(k - 1) % dim`.
pub fn gaussian_blobs(
    n_per: usize,
    classes: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> (FeatureMatrix, Vec<usize>) {
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(classes * n_per);
    let mut labels = Vec::with_capacity(classes * n_per);
    for class in 0..classes {
        for _ in 0..n_per {
            let mut row: Vec<f64> = (0..dim).map(|_| normal(&mut rng)).collect();
            if class > 0 {
                row[(class - 1) % dim] += separation;
            }
            rows.push(row);
            labels.push(class);
        }
    }
    (FeatureMatrix::from_rows(&rows).unwrap(), labels)
}
