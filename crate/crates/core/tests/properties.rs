//! Randomized invariants: equivariance, scale invariance, split
//! uniformity and standardization.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use scarcemol::dataio::{generate_splits, standardize_features, FeatureMatrix, SplitSpec};
use scarcemol::graph::{knn_graph, GraphParams};
use scarcemol::mbo::{MboParams, MboWorkspace};
use scarcemol::metrics::{roc_auc, rs_scores};
use scarcemol::spectral::{eigendecompose, Method, SpectralDecomposition};

fn points(max_n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (6..max_n).prop_flat_map(move |n| prop::collection::vec(prop::collection::vec(-5.0..5.0f64, dim), n))
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn knn_weights_permute_conjugately(
        (rows, perm) in points(40, 3).prop_flat_map(|r| { let n = r.len(); (Just(r), permutation(n)) }),
        k in 1usize..5,
    ) {
        let n = rows.len();
        let f = FeatureMatrix::from_rows(&rows).unwrap();
        // permuted row p holds original row perm[p]
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let fp = FeatureMatrix::from_rows(&permuted).unwrap();
        let p = GraphParams::new(k.min(n - 1));
        let w = knn_graph(&f, &p).unwrap().weights.to_dense();
        let wp = knn_graph(&fp, &p).unwrap().weights.to_dense();
        for a in 0..n {
            for b in 0..n {
                prop_assert!((wp[(a, b)] - w[(perm[a], perm[b])]).abs() < 1e-12);
            }
        }
    }

    // Exact invariance holds only for epsilon = 0; the regularizer moves each
    // score by at most epsilon / (min(1, s) * R_max) (resp. d_max).
    #[test]
    fn rs_scores_ignore_feature_scale_up_to_epsilon(
        rows in points(30, 2),
        scale in 0.01..100.0f64,
        seed in any::<u64>(),
    ) {
        let n = rows.len();
        let labels: Vec<usize> = (0..n).map(|i| ((seed >> (i % 64)) & 1) as usize).collect();
        let f = FeatureMatrix::from_rows(&rows).unwrap();
        let a = rs_scores(&f, &labels, &[]).unwrap();
        let b = rs_scores(&f.scaled(scale), &labels, &[]).unwrap();

        let dist = |i: usize, j: usize| -> f64 {
            rows[i].iter().zip(&rows[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        };
        let d_max = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| dist(i, j)).fold(0.0, f64::max);
        let r_max = (0..n)
            .map(|i| (0..n).filter(|&j| labels[j] != labels[i]).map(|j| dist(i, j)).sum::<f64>())
            .fold(0.0, f64::max);
        let eps = scarcemol::metrics::RS_EPSILON;
        let shrink = scale.min(1.0);
        let r_tol = if r_max > 0.0 { 2.0 * eps / (shrink * r_max) } else { 0.0 } + 1e-12;
        let s_tol = 2.0 * eps / (shrink * d_max) + 1e-12;
        for i in 0..n {
            prop_assert!((a.residue[i] - b.residue[i]).abs() <= r_tol);
            prop_assert!((a.similarity[i] - b.similarity[i]).abs() <= s_tol);
        }
    }

    #[test]
    fn auc_ignores_increasing_transforms(
        data in prop::collection::vec((0u8..6, 0usize..2), 2..60),
    ) {
        let scores: Vec<f64> = data.iter().map(|(s, _)| f64::from(*s)).collect();
        let labels: Vec<usize> = data.iter().map(|(_, l)| *l).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let warped: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() - 3.0).collect();
        prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), roc_auc(&warped, &labels).unwrap());
    }

    #[test]
    fn diffusion_substeps_are_permutation_equivariant(
        (rows, perm) in points(30, 2).prop_flat_map(|r| { let n = r.len(); (Just(r), permutation(n)) }),
        seed in any::<u64>(),
    ) {
        let n = rows.len();
        let f = FeatureMatrix::from_rows(&rows).unwrap();
        let g = knn_graph(&f, &GraphParams::new(3.min(n - 1))).unwrap();
        let spec = eigendecompose(&g.laplacian, n.min(8)).unwrap();
        let u0 = DMatrix::from_fn(n, 2, |i, k| {
            let h = scarcemol::rng::splitmix64(seed ^ (2 * i + k) as u64);
            (h >> 11) as f64 / (1u64 << 53) as f64
        });
        let labeled: Vec<usize> = (0..n).filter(|i| i % 4 == 0).collect();
        let p = MboParams::new(10.0, 0.5, 1, 2, 0);

        // position a of the permuted problem holds original point perm[a]
        let mut inverse = vec![0; n];
        for (a, &i) in perm.iter().enumerate() {
            inverse[i] = a;
        }
        let spec_p = SpectralDecomposition {
            eigenvalues: spec.eigenvalues.clone(),
            eigenvectors: spec.eigenvectors.select_rows(&perm),
            method: Method::Exact,
        };
        let u0_p = u0.select_rows(&perm);
        let labeled_p: Vec<usize> = labeled.iter().map(|&i| inverse[i]).collect();

        let mut ws = MboWorkspace::new(&spec, &labeled, &u0, &p);
        let mut ws_p = MboWorkspace::new(&spec_p, &labeled_p, &u0_p, &p);
        for _ in 0..3 {
            ws.substep();
            ws_p.substep();
        }
        let u = ws.state(&spec).select_rows(&perm);
        let u_p = ws_p.state(&spec_p);
        prop_assert!((u - &u_p).amax() < 1e-12);
    }
}

#[test]
fn labeled_indices_are_uniform() {
    let splits = generate_splits(20, 5, 10_000, 99).unwrap();
    let mut counts = [0usize; 20];
    for s in &splits {
        assert_eq!(s.gamma.iter().filter(|&&g| g).count(), 5);
        for i in s.labeled_indices() {
            counts[i] += 1;
        }
    }
    for c in counts {
        let freq = c as f64 / 10_000.0;
        assert!((freq - 0.25).abs() < 0.02, "frequency {freq}");
    }
}

#[test]
fn standardized_columns_have_zero_mean_unit_std() {
    let (f, _) = common::two_gaussians(50, 4, 3.0, 5);
    let s = standardize_features(&f.scaled(7.5));
    for j in 0..s.n_cols() {
        let col: Vec<f64> = (0..s.n_rows()).map(|i| s.get(i, j)).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / col.len() as f64;
        assert!(mean.abs() < 1e-10);
        assert!((var.sqrt() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn split_from_labeled_roundtrips() {
    let s = SplitSpec::from_labeled(6, &[4, 1], 0).unwrap();
    assert_eq!(s.labeled_indices(), vec![1, 4]);
    assert_eq!(s.unlabeled_indices(), vec![0, 2, 3, 5]);
}
