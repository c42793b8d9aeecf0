//! MBO dynamics against a dense implicit-Euler reference.

mod common;

use nalgebra::DMatrix;
use scarcemol::dataio::{generate_splits, SplitSpec};
use scarcemol::graph::{knn_graph, GraphParams, Normalization, SimilarityGraph};
use scarcemol::mbo::{initial_state, mbo_classify, mbo_sweep, project_to_simplex, MboParams};
use scarcemol::sparse::CsrMatrix;
use scarcemol::spectral::decompose_graph;

/// Full-matrix MBO: every substep solves `(I + tau L) U' = U - tau C Gamma (U - U0)`.
fn dense_mbo(l: &DMatrix<f64>, split: &SplitSpec, u0: &DMatrix<f64>, p: &MboParams) -> (DMatrix<f64>, Vec<usize>) {
    let n = l.nrows();
    let tau = p.dt / p.n_substeps as f64;
    let lu = (DMatrix::identity(n, n) + l * tau).lu();
    let mut u = u0.clone();
    let mut probs = u0.clone();
    let mut hard = Vec::new();
    for _ in 0..p.n_iters {
        for _ in 0..p.n_substeps {
            let mut rhs = u.clone();
            for i in split.labeled_indices() {
                for k in 0..u.ncols() {
                    rhs[(i, k)] -= tau * p.c * (u[(i, k)] - u0[(i, k)]);
                }
            }
            u = lu.solve(&rhs).unwrap();
        }
        for i in 0..n {
            let row: Vec<f64> = u.row(i).iter().copied().collect();
            for (k, x) in project_to_simplex(&row).into_iter().enumerate() {
                probs[(i, k)] = x;
            }
        }
        hard =
            (0..n).map(|i| (0..u.ncols()).fold(0, |b, k| if probs[(i, k)] > probs[(i, b)] { k } else { b })).collect();
        u = DMatrix::from_fn(n, u.ncols(), |i, k| if hard[i] == k { 1.0 } else { 0.0 });
    }
    (probs, hard)
}

#[test]
fn full_basis_matches_dense_implicit_euler() {
    for (case, (n_per, classes, normalization)) in
        [(20, 2, Normalization::Unnormalized), (15, 3, Normalization::Symmetric), (30, 2, Normalization::Symmetric)]
            .into_iter()
            .enumerate()
    {
        let (f, labels) = common::gaussian_blobs(n_per, classes, 3, 2.0, case as u64);
        let n = f.n_rows();
        let g = knn_graph(&f, &GraphParams::new(6).with_normalization(normalization)).unwrap();
        let spec = decompose_graph(&g, n).unwrap();
        let l = g.laplacian.to_dense();
        let split = &generate_splits(n, n / 6, 1, 40 + case as u64).unwrap()[0];
        for (c, dt, n_iters) in [(1.0, 0.1, 1), (10.0, 0.5, 7), (100.0, 1.0, 12)] {
            let mut p = MboParams::new(c, dt, n_iters, classes, 5);
            p.n_substeps = 3;
            let out = mbo_classify(&spec, split, &labels, &p).unwrap();
            let u0 = initial_state(split, &labels, classes, p.seed);
            let (probs, hard) = dense_mbo(&l, split, &u0, &p);
            let diff = (out.probabilities.values() - &probs).amax();
            assert!(diff < 1e-8, "case {case}, C={c}, dt={dt}: {diff}");
            assert_eq!(out.hard_labels, hard, "case {case}, C={c}, dt={dt}");
        }
    }
}

#[test]
fn disjoint_cliques_take_their_seed_label() {
    let n = 12;
    let mut triplets = Vec::new();
    for block in [0..6, 6..12] {
        for i in block.clone() {
            for j in block.clone() {
                if i != j {
                    triplets.push((i, j, 1.0));
                }
            }
        }
    }
    let g = SimilarityGraph::from_weights(CsrMatrix::from_triplets(n, triplets), Normalization::Unnormalized);
    let spec = decompose_graph(&g, 4).unwrap();
    let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= 6)).collect();
    let split = SplitSpec::from_labeled(n, &[2, 9], 0).unwrap();
    for seed in 0..10 {
        let out = mbo_classify(&spec, &split, &labels, &MboParams::new(10.0, 1.0, 20, 2, seed)).unwrap();
        assert_eq!(out.hard_labels, labels, "seed {seed}");
    }
}

#[test]
fn sweep_checkpoints_equal_separate_runs() {
    let (f, labels) = common::two_gaussians(60, 2, 1.0, 8);
    let g = knn_graph(&f, &GraphParams::new(8)).unwrap();
    let spec = decompose_graph(&g, 15).unwrap();
    let split = &generate_splits(120, 6, 1, 3).unwrap()[0];
    let p = MboParams::new(10.0, 0.5, 0, 2, 21);
    let checkpoints = [40, 0, 1, 5, 100, 5];
    let swept = mbo_sweep(&spec, split, &labels, &p, &checkpoints).unwrap();
    for (t, out) in checkpoints.iter().zip(&swept) {
        let single = mbo_classify(&spec, split, &labels, &MboParams { n_iters: *t, ..p }).unwrap();
        assert_eq!(&single, out, "n_iters {t}");
        assert_eq!(out.iterations_run, *t);
    }
}

#[test]
fn runs_depend_only_on_inputs_and_seed() {
    let (f, labels) = common::two_gaussians(50, 2, 1.5, 2);
    let g = knn_graph(&f, &GraphParams::new(7)).unwrap();
    let spec = decompose_graph(&g, 10).unwrap();
    let split = &generate_splits(100, 5, 1, 0).unwrap()[0];
    let p = MboParams::new(10.0, 0.5, 30, 2, 77);
    let a = mbo_classify(&spec, split, &labels, &p).unwrap();
    let b = mbo_classify(&spec, split, &labels, &p).unwrap();
    assert_eq!(a, b);
    let u0 = initial_state(split, &labels, 2, 78);
    assert_ne!(u0, initial_state(split, &labels, 2, 77));
}

#[test]
fn labeled_rows_start_at_their_vertex() {
    let split = SplitSpec::from_labeled(30, &[0, 7, 19], 0).unwrap();
    let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
    let u0 = initial_state(&split, &labels, 3, 4);
    for i in 0..30 {
        let row: Vec<f64> = u0.row(i).iter().copied().collect();
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&x| x >= 0.0));
        if split.gamma[i] {
            assert_eq!(row[labels[i]], 1.0);
        }
    }
}
