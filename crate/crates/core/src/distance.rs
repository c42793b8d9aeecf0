//! Pairwise distances over feature rows.
//!
//! 0/1 fingerprint matrices are bit-packed; their squared euclidean
//! distance is the Hamming distance and is computed with popcounts.

use serde::{Deserialize, Serialize};

use crate::dataio::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Cosine,
}

enum Storage<'a> {
    Dense { f: &'a FeatureMatrix, norms: Vec<f64> },
    Bits { words: Vec<u64>, stride: usize, counts: Vec<u32> },
}

pub struct Distances<'a> {
    storage: Storage<'a>,
    metric: Metric,
    n: usize,
}

impl<'a> Distances<'a> {
    pub fn new(f: &'a FeatureMatrix, metric: Metric) -> Self {
        let n = f.n_rows();
        let storage = if f.is_binary() {
            let stride = f.n_cols().div_ceil(64);
            let mut words = vec![0u64; n * stride];
            let mut counts = vec![0u32; n];
            for i in 0..n {
                for (j, &v) in f.row(i).iter().enumerate() {
                    if v == 1.0 {
                        words[i * stride + j / 64] |= 1 << (j % 64);
                        counts[i] += 1;
                    }
                }
            }
            Storage::Bits { words, stride, counts }
        } else {
            let norms = (0..n).map(|i| f.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
            Storage::Dense { f, norms }
        };
        Distances { storage, metric, n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match (&self.storage, self.metric) {
            (Storage::Bits { words, stride, .. }, Metric::Euclidean) => {
                let (a, b) = (&words[i * stride..(i + 1) * stride], &words[j * stride..(j + 1) * stride]);
                let h: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
                f64::from(h).sqrt()
            }
            (Storage::Bits { words, stride, counts }, Metric::Cosine) => {
                let (a, b) = (&words[i * stride..(i + 1) * stride], &words[j * stride..(j + 1) * stride]);
                let common: u32 = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum();
                cosine_distance(f64::from(common), f64::from(counts[i]).sqrt(), f64::from(counts[j]).sqrt())
            }
            (Storage::Dense { f, .. }, Metric::Euclidean) => {
                f.row(i).iter().zip(f.row(j)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            (Storage::Dense { f, norms }, Metric::Cosine) => {
                let dot: f64 = f.row(i).iter().zip(f.row(j)).map(|(x, y)| x * y).sum();
                cosine_distance(dot, norms[i], norms[j])
            }
        }
    }

    /// Distances from `i` to every row (including itself).
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.distance(i, j)).collect()
    }
}

fn cosine_distance(dot: f64, na: f64, nb: f64) -> f64 {
    match (na == 0.0, nb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => (1.0 - dot / (na * nb)).max(0.0),
    }
}
