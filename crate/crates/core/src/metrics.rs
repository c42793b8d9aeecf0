//! ROC-AUC and residue-similarity (R-S) analysis.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataio::FeatureMatrix;
use crate::distance::{Distances, Metric};
use crate::error::{Error, Result};

/// Regularizer in the R-S denominators.
pub const RS_EPSILON: f64 = 1e-5;

/// Area under the ROC curve for binary `labels` (1 = positive), with tied
/// scores given half credit (midrank method).
pub fn roc_auc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidParameter(format!("binary labels expected, found {l}")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their mean
        let midrank = (start + 1 + end) as f64 / 2.0;
        let pos = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        pos_rank_sum += midrank * pos as f64;
        start = end;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsReport {
    /// Residue score `R_i` of every point.
    pub residue: Vec<f64>,
    /// Similarity score `S_i` of every point.
    pub similarity: Vec<f64>,
    /// Class residue indices `CRI_k`.
    pub cri: Vec<f64>,
    /// Class similarity indices `CSI_k`.
    pub csi: Vec<f64>,
    pub ri: f64,
    pub si: f64,
    pub rsi: f64,
    pub epsilon: f64,
    pub true_labels: Vec<usize>,
    pub predicted_labels: Vec<usize>,
    /// Set when no predictions were given and true labels stand in for them.
    pub predictions_are_fallback: bool,
}

/// Residue and similarity scores over euclidean feature distances.
///
/// `predicted_labels` may be empty, in which case the true labels are used
/// for coloring and the report is flagged.
pub fn rs_scores(features: &FeatureMatrix, true_labels: &[usize], predicted_labels: &[usize]) -> Result<RsReport> {
    let n = features.n_rows();
    if true_labels.len() != n {
        return Err(Error::ShapeMismatch(format!("{n} feature rows for {} labels", true_labels.len())));
    }
    let fallback = predicted_labels.is_empty();
    if !fallback && predicted_labels.len() != n {
        return Err(Error::ShapeMismatch(format!("{n} feature rows for {} predictions", predicted_labels.len())));
    }
    let k = true_labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut class_size = vec![0usize; k];
    for &l in true_labels {
        class_size[l] += 1;
    }

    let dist = Distances::new(features, Metric::Euclidean);
    // per point: (sum of out-of-class distances, in-class distances, row max)
    let sums: Vec<(f64, Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out_sum = 0.0;
            let mut same = Vec::with_capacity(class_size[true_labels[i]]);
            let mut row_max: f64 = 0.0;
            for j in 0..n {
                let d = dist.distance(i, j);
                row_max = row_max.max(d);
                if true_labels[j] == true_labels[i] {
                    same.push(d);
                } else {
                    out_sum += d;
                }
            }
            (out_sum, same, row_max)
        })
        .collect();
    let r_max = sums.iter().map(|s| s.0).fold(0.0, f64::max);
    let d_max = sums.iter().map(|s| s.2).fold(0.0, f64::max);
    let eps = RS_EPSILON;

    let residue: Vec<f64> = sums.iter().map(|s| s.0 / (r_max + eps)).collect();
    let similarity: Vec<f64> = sums
        .iter()
        .zip(true_labels)
        .map(|((_, same, _), &l)| {
            let total: f64 = same.iter().map(|d| 1.0 - d / (d_max + eps)).sum();
            total / (class_size[l] as f64 + eps)
        })
        .collect();

    let mut cri = vec![0.0; k];
    let mut csi = vec![0.0; k];
    for i in 0..n {
        cri[true_labels[i]] += residue[i];
        csi[true_labels[i]] += similarity[i];
    }
    for c in 0..k {
        cri[c] /= class_size[c] as f64 + eps;
        csi[c] /= class_size[c] as f64 + eps;
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let (ri, si) = (mean(&cri), mean(&csi));
    Ok(RsReport {
        residue,
        similarity,
        cri,
        csi,
        ri,
        si,
        rsi: 1.0 - (ri - si).abs(),
        epsilon: eps,
        true_labels: true_labels.to_vec(),
        predicted_labels: if fallback { true_labels.to_vec() } else { predicted_labels.to_vec() },
        predictions_are_fallback: fallback,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsRow {
    pub index: usize,
    pub true_class: usize,
    pub predicted_class: usize,
    pub residue: f64,
    pub similarity: f64,
}

/// One row per point, grouped by true class and by index within a class.
pub fn rs_plot_data(report: &RsReport) -> Vec<RsRow> {
    let mut rows: Vec<RsRow> = (0..report.residue.len())
        .map(|i| RsRow {
            index: i,
            true_class: report.true_labels[i],
            predicted_class: report.predicted_labels[i],
            residue: report.residue[i],
            similarity: report.similarity[i],
        })
        .collect();
    rows.sort_by_key(|r| (r.true_class, r.index));
    rows
}

/// Writes plot rows as CSV with header
/// `index,true_class,predicted_class,residue,similarity`.
pub fn write_rs_csv(rows: &[RsRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    if rows.is_empty() {
        w.write_record(["index", "true_class", "predicted_class", "residue", "similarity"])
            .map_err(|e| csv_error(path, e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Io { path: path.to_path_buf(), source: std::io::Error::other(format!("{other:?}")) },
    }
}
