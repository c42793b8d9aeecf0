//! Split-and-average benchmark runs over a hyperparameter grid, and
//! consensus trials combining two methods.
//!
//! Every (feature set, graph) pair is decomposed once, with the largest
//! requested `N_e`; smaller `N_e` values use the leading columns. All grid
//! cells see the same random splits. MBO runs sharing `(N_e, C, dt)` on one
//! split are executed once up to the largest `N_t`.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    default_num_splits, ExperimentConfig, FeatureConfig, FeatureSource, GraphGrid, MboGrid, SpectralGrid,
};

use crate::dataio::{
    generate_splits, generate_stratified_splits, labeled_count_for_fraction, load_dataset, load_feature_matrix,
    standardize_features, FeatureMatrix, SplitSpec,
};
use crate::error::{Error, Result};
use crate::fingerprint::fingerprint_matrix;
use crate::graph::{knn_graph, GraphParams};
use crate::mbo::{consensus, mbo_classify, mbo_sweep, MboOutput, MboParams};
use crate::metrics::roc_auc;
use crate::rng::{derive_seed, TAG_TRIAL};
use crate::spectral::cache::{cache_key, SpectralCache};
use crate::spectral::{decompose_graph, nystrom, Method, SpectralDecomposition};

/// Labels plus one feature matrix per point of the feature grid.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub name: String,
    pub labels: Vec<usize>,
    pub features: Vec<(FeatureSource, FeatureMatrix)>,
}

impl PreparedData {
    pub fn new(
        name: impl Into<String>,
        labels: Vec<usize>,
        features: Vec<(FeatureSource, FeatureMatrix)>,
    ) -> Result<Self> {
        if let Some((src, f)) = features.iter().find(|(_, f)| f.n_rows() != labels.len()) {
            return Err(Error::RowCountMismatch { expected: labels.len(), found: f.n_rows() }
                .context(format!("features {src}")));
        }
        Ok(PreparedData { name: name.into(), labels, features })
    }

    /// Loads the dataset and builds every feature matrix of the grid.
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let ds = load_dataset(&cfg.dataset)?;
        let mut features = Vec::new();
        for src in cfg.feature_sources() {
            let f = match &src {
                FeatureSource::Ecfp(p) => fingerprint_matrix(&ds.smiles, p)?,
                FeatureSource::External { path } => {
                    let raw = load_feature_matrix(path, ds.len())?;
                    match cfg.features {
                        FeatureConfig::External { standardize: true, .. } => standardize_features(&raw),
                        _ => raw,
                    }
                }
            };
            features.push((src, f));
        }
        PreparedData::new(ds.name.clone(), ds.labels, features)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// One fully specified grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParams {
    pub features: FeatureSource,
    pub graph: GraphParams,
    pub n_eigs: usize,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    pub c: f64,
    pub dt: f64,
    pub n_iters: usize,
    pub n_substeps: usize,
}

impl RunParams {
    pub fn mbo(&self, n_classes: usize, seed: u64, early_stop: bool) -> MboParams {
        MboParams {
            c: self.c,
            dt: self.dt,
            n_iters: self.n_iters,
            n_substeps: self.n_substeps,
            n_classes,
            seed,
            early_stop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigurationResult {
    pub params: RunParams,
    /// Mean over evaluated splits; `None` when every split was skipped.
    pub mean_auc: Option<f64>,
    /// Sample standard deviation (denominator `n - 1`, 0 for one split).
    pub std_auc: Option<f64>,
    /// In split order; `None` marks a skipped split.
    pub per_split_auc: Vec<Option<f64>>,
    pub skipped: usize,
}

impl ConfigurationResult {
    fn from_aucs(params: RunParams, per_split_auc: Vec<Option<f64>>) -> Self {
        let (mean_auc, std_auc) = mean_std(&per_split_auc);
        let skipped = per_split_auc.iter().filter(|a| a.is_none()).count();
        ConfigurationResult { params, mean_auc, std_auc, per_split_auc, skipped }
    }
}

/// Wall-clock time per stage, summed over the grid.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub features: Duration,
    pub decomposition: Duration,
    pub mbo: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub feature_source: FeatureConfig,
    pub labeled_fraction: f64,
    pub labeled_count: usize,
    pub num_splits: usize,
    pub seed: u64,
    pub configurations: Vec<ConfigurationResult>,
    /// Highest mean AUC; the earliest grid point wins ties.
    pub best: Option<ConfigurationResult>,
    /// Not serialized, so result files are reproducible byte for byte.
    #[serde(skip)]
    pub timings: Timings,
}

/// Mean and sample standard deviation of the present values.
pub fn mean_std(values: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.iter().flatten().copied().collect();
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() < 2 { 0.0 } else { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() };
    (Some(mean), Some(std))
}

/// Loads the data named by `cfg` and runs the full grid.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();
    let data = PreparedData::load(cfg)?;
    let features_time = start.elapsed();
    let mut result = run_prepared(cfg, &data)?;
    result.timings.features = features_time;
    result.timings.total = start.elapsed();
    Ok(result)
}

/// Runs the grid on already loaded data. `cfg.dataset` and the feature
/// config are only recorded, not read.
pub fn run_prepared(cfg: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentResult> {
    let start = Instant::now();
    let n = data.n();
    cfg.validate_for(n)?;
    check_binary(&data.labels)?;
    let labeled_count = labeled_count_for_fraction(n, cfg.labeled_fraction);
    let splits = make_splits(cfg, &data.labels, labeled_count, cfg.seed)?;
    let evaluable: Vec<bool> = splits.iter().map(|s| is_evaluable(s, &data.labels)).collect();
    let cache = cfg.cache_dir.as_ref().map(SpectralCache::new);
    let max_ne = *cfg.spectral.n_eigs.iter().max().expect("validated non-empty");
    let mut timings = Timings::default();
    let mut configurations = Vec::with_capacity(cfg.grid_size());

    for (source, features) in &data.features {
        for gp in cfg.graph_params() {
            let context = format!("{source}, n_neighbors = {}", gp.n_neighbors);
            let t = Instant::now();
            let full = decompose(features, &gp, max_ne, cfg, cache.as_ref()).map_err(|e| e.context(context.clone()))?;
            let specs: Vec<SpectralDecomposition> = cfg.spectral.n_eigs.iter().map(|&k| full.truncated(k)).collect();
            timings.decomposition += t.elapsed();
            log::info!("{context}: decomposition in {:.2?}", t.elapsed());

            let t = Instant::now();
            let per_split: Vec<Vec<Option<f64>>> = splits
                .par_iter()
                .zip(&evaluable)
                .enumerate()
                .map(|(k, (split, &ok))| {
                    split_aucs(&specs, split, &data.labels, &cfg.mbo, ok)
                        .map_err(|e| e.context(format!("{context}, split {k}")))
                })
                .collect::<Result<_>>()?;
            timings.mbo += t.elapsed();

            let mut cell = 0;
            for &n_eigs in &cfg.spectral.n_eigs {
                for &c in &cfg.mbo.c {
                    for &dt in &cfg.mbo.dt {
                        for &n_iters in &cfg.mbo.n_iters {
                            let params = RunParams {
                                features: source.clone(),
                                graph: gp,
                                n_eigs,
                                method: cfg.spectral.method,
                                sample_size: sample_size(cfg),
                                c,
                                dt,
                                n_iters,
                                n_substeps: cfg.mbo.n_substeps,
                            };
                            let aucs = per_split.iter().map(|row| row[cell]).collect();
                            configurations.push(ConfigurationResult::from_aucs(params, aucs));
                            cell += 1;
                        }
                    }
                }
            }
        }
    }

    let best = best_of(&configurations).cloned();
    timings.total = start.elapsed();
    Ok(ExperimentResult {
        dataset: data.name.clone(),
        feature_source: cfg.features.clone(),
        labeled_fraction: cfg.labeled_fraction,
        labeled_count,
        num_splits: splits.len(),
        seed: cfg.seed,
        configurations,
        best,
        timings,
    })
}

fn best_of(configs: &[ConfigurationResult]) -> Option<&ConfigurationResult> {
    let mut best: Option<&ConfigurationResult> = None;
    for c in configs {
        if let Some(m) = c.mean_auc {
            if best.and_then(|b| b.mean_auc).is_none_or(|bm| m > bm) {
                best = Some(c);
            }
        }
    }
    best
}

fn sample_size(cfg: &ExperimentConfig) -> Option<usize> {
    match cfg.spectral.method {
        Method::Nystrom => cfg.spectral.sample_size,
        Method::Exact => None,
    }
}

fn check_binary(labels: &[usize]) -> Result<()> {
    match labels.iter().find(|&&l| l > 1) {
        Some(l) => Err(Error::Config(format!("the ROC-AUC protocol needs binary labels, found class {l}"))),
        None => Ok(()),
    }
}

fn make_splits(cfg: &ExperimentConfig, labels: &[usize], labeled_count: usize, seed: u64) -> Result<Vec<SplitSpec>> {
    let num = cfg.effective_num_splits();
    if cfg.stratified {
        generate_stratified_splits(labels, labeled_count, num, seed)
    } else {
        generate_splits(labels.len(), labeled_count, num, seed)
    }
}

/// True when the unlabeled points contain both classes.
fn is_evaluable(split: &SplitSpec, labels: &[usize]) -> bool {
    let mut seen = [false; 2];
    for i in split.unlabeled_indices() {
        seen[labels[i].min(1)] = true;
    }
    seen[0] && seen[1]
}

/// Leading `n_eigs` eigenpairs for one feature matrix and graph setting,
/// through the cache when one is configured.
pub fn decompose(
    features: &FeatureMatrix,
    gp: &GraphParams,
    n_eigs: usize,
    cfg: &ExperimentConfig,
    cache: Option<&SpectralCache>,
) -> Result<SpectralDecomposition> {
    let compute = || match cfg.spectral.method {
        Method::Exact => decompose_graph(&knn_graph(features, gp)?, n_eigs),
        Method::Nystrom => {
            let s = cfg.spectral.sample_size.unwrap_or(features.n_rows());
            nystrom(features, n_eigs, s, gp, cfg.seed)
        }
    };
    match cache {
        None => compute(),
        Some(cache) => {
            let tag = match cfg.spectral.method {
                Method::Exact => "exact".to_string(),
                Method::Nystrom => {
                    format!("nystrom:{}:{}", cfg.spectral.sample_size.unwrap_or(features.n_rows()), cfg.seed)
                }
            };
            cache.get_or_compute(&cache_key(features, gp, n_eigs, &tag), compute)
        }
    }
}

/// AUC of class-1 probabilities over the unlabeled points.
pub fn unlabeled_auc(out: &MboOutput, split: &SplitSpec, labels: &[usize]) -> Result<f64> {
    let unlabeled = split.unlabeled_indices();
    let probs = out.probabilities.values();
    let scores: Vec<f64> = unlabeled.iter().map(|&i| probs[(i, 1)]).collect();
    let truth: Vec<usize> = unlabeled.iter().map(|&i| labels[i]).collect();
    roc_auc(&scores, &truth)
}

/// AUC for every `(N_e, C, dt, N_t)` cell on one split, in grid order.
fn split_aucs(
    specs: &[SpectralDecomposition],
    split: &SplitSpec,
    labels: &[usize],
    grid: &MboGrid,
    evaluable: bool,
) -> Result<Vec<Option<f64>>> {
    let cells = specs.len() * grid.c.len() * grid.dt.len() * grid.n_iters.len();
    if !evaluable {
        return Ok(vec![None; cells]);
    }
    let max_iters = *grid.n_iters.iter().max().expect("validated non-empty");
    let mut aucs = Vec::with_capacity(cells);
    for spec in specs {
        for &c in &grid.c {
            for &dt in &grid.dt {
                let p = MboParams {
                    c,
                    dt,
                    n_iters: max_iters,
                    n_substeps: grid.n_substeps,
                    n_classes: 2,
                    seed: split.seed,
                    early_stop: grid.early_stop,
                };
                let outs = mbo_sweep(spec, split, labels, &p, &grid.n_iters)
                    .map_err(|e| e.context(format!("n_eigs = {}, C = {c}, dt = {dt}", spec.n_eigs())))?;
                for out in &outs {
                    aucs.push(Some(unlabeled_auc(out, split, labels)?));
                }
            }
        }
    }
    Ok(aucs)
}

/// The single grid point of `cfg`, or an error when its grid has more.
pub fn single_point(cfg: &ExperimentConfig) -> Result<RunParams> {
    if cfg.grid_size() != 1 {
        return Err(Error::Config(format!("expected a single grid point, the config describes {}", cfg.grid_size())));
    }
    Ok(RunParams {
        features: cfg.feature_sources().remove(0),
        graph: cfg.graph_params()[0],
        n_eigs: cfg.spectral.n_eigs[0],
        method: cfg.spectral.method,
        sample_size: sample_size(cfg),
        c: cfg.mbo.c[0],
        dt: cfg.mbo.dt[0],
        n_iters: cfg.mbo.n_iters[0],
        n_substeps: cfg.mbo.n_substeps,
    })
}

/// One classification of one split.
#[derive(Debug, Clone)]
pub struct Classification {
    pub params: RunParams,
    pub split: SplitSpec,
    pub output: MboOutput,
    /// `None` when the unlabeled points are single-class.
    pub auc: Option<f64>,
}

/// Runs the single grid point of `cfg` on split `split_index` of the
/// experiment's split sequence.
pub fn classify_split(cfg: &ExperimentConfig, data: &PreparedData, split_index: usize) -> Result<Classification> {
    let params = single_point(cfg)?;
    let n = data.n();
    cfg.validate_for(n)?;
    if split_index >= cfg.effective_num_splits() {
        return Err(Error::Config(format!("split {split_index} is outside 0..{}", cfg.effective_num_splits())));
    }
    let labeled_count = labeled_count_for_fraction(n, cfg.labeled_fraction);
    let split = make_splits(cfg, &data.labels, labeled_count, cfg.seed)?.swap_remove(split_index);
    let features = &data.features[0].1;
    let cache = cfg.cache_dir.as_ref().map(SpectralCache::new);
    let spec = decompose(features, &params.graph, params.n_eigs, cfg, cache.as_ref())?;
    let n_classes = data.labels.iter().copied().max().unwrap_or(0).max(1) + 1;
    let output = mbo_classify(&spec, &split, &data.labels, &params.mbo(n_classes, split.seed, cfg.mbo.early_stop))?;
    let auc = if n_classes == 2 && is_evaluable(&split, &data.labels) {
        Some(unlabeled_auc(&output, &split, &data.labels)?)
    } else {
        None
    };
    Ok(Classification { params, split, output, auc })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusTrial {
    pub seed: u64,
    pub mean_auc: Option<f64>,
    pub std_auc: Option<f64>,
    pub per_split_auc: Vec<Option<f64>>,
    pub skipped: usize,
    /// Mean AUC of each method alone on the same splits.
    pub mean_auc_a: Option<f64>,
    pub mean_auc_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusResult {
    pub dataset: String,
    pub labeled_fraction: f64,
    pub labeled_count: usize,
    pub num_splits: usize,
    pub trials: usize,
    pub method_a: RunParams,
    pub method_b: RunParams,
    /// Over trial means.
    pub mean_auc: Option<f64>,
    pub std_auc: Option<f64>,
    pub mean_auc_a: Option<f64>,
    pub mean_auc_b: Option<f64>,
    pub per_trial: Vec<ConsensusTrial>,
    #[serde(skip)]
    pub timings: Timings,
}

/// Seed of consensus trial `t`: running a single-method experiment with this
/// seed reproduces the trial's splits and MBO initializations.
pub fn trial_seed(master: u64, t: usize) -> u64 {
    derive_seed(master, TAG_TRIAL, t as u64)
}

pub fn run_consensus(a: &ExperimentConfig, b: &ExperimentConfig, trials: usize) -> Result<ConsensusResult> {
    if a.dataset != b.dataset {
        return Err(Error::Config(format!(
            "consensus needs one dataset, got {} and {}",
            a.dataset.display(),
            b.dataset.display()
        )));
    }
    a.validate()?;
    b.validate()?;
    let start = Instant::now();
    let da = PreparedData::load(a)?;
    let db = PreparedData::load(b)?;
    let features_time = start.elapsed();
    let mut r = run_consensus_prepared(a, &da, b, &db, trials)?;
    r.timings.features = features_time;
    r.timings.total = start.elapsed();
    Ok(r)
}

/// Trials draw their splits from [`trial_seed`]`(a.seed, t)`; both methods
/// see the same splits and the same MBO initializations.
pub fn run_consensus_prepared(
    a: &ExperimentConfig,
    da: &PreparedData,
    b: &ExperimentConfig,
    db: &PreparedData,
    trials: usize,
) -> Result<ConsensusResult> {
    let start = Instant::now();
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if da.labels != db.labels {
        return Err(Error::Config("consensus methods disagree on the dataset labels".into()));
    }
    if a.labeled_fraction != b.labeled_fraction
        || a.effective_num_splits() != b.effective_num_splits()
        || a.stratified != b.stratified
    {
        return Err(Error::Config(
            "consensus methods need the same labeled_fraction, num_splits and split sampling".into(),
        ));
    }
    let pa = single_point(a)?;
    let pb = single_point(b)?;
    let n = da.n();
    a.validate_for(n)?;
    b.validate_for(n)?;
    check_binary(&da.labels)?;
    let labels = &da.labels;
    let labeled_count = labeled_count_for_fraction(n, a.labeled_fraction);

    let mut timings = Timings::default();
    let t = Instant::now();
    let spec_a =
        decompose(&da.features[0].1, &pa.graph, pa.n_eigs, a, a.cache_dir.as_ref().map(SpectralCache::new).as_ref())
            .map_err(|e| e.context("consensus method a"))?;
    let spec_b =
        decompose(&db.features[0].1, &pb.graph, pb.n_eigs, b, b.cache_dir.as_ref().map(SpectralCache::new).as_ref())
            .map_err(|e| e.context("consensus method b"))?;
    timings.decomposition = t.elapsed();

    let t = Instant::now();
    let mut per_trial = Vec::with_capacity(trials);
    for trial in 0..trials {
        let seed = trial_seed(a.seed, trial);
        let splits = make_splits(a, labels, labeled_count, seed)?;
        let rows: Vec<[Option<f64>; 3]> = splits
            .par_iter()
            .enumerate()
            .map(|(k, split)| {
                consensus_split(&spec_a, &spec_b, &pa, &pb, a, b, split, labels)
                    .map_err(|e| e.context(format!("trial {trial}, split {k}")))
            })
            .collect::<Result<_>>()?;
        let column = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
        let per_split_auc = column(0);
        let (mean_auc, std_auc) = mean_std(&per_split_auc);
        per_trial.push(ConsensusTrial {
            seed,
            mean_auc,
            std_auc,
            skipped: per_split_auc.iter().filter(|x| x.is_none()).count(),
            per_split_auc,
            mean_auc_a: mean_std(&column(1)).0,
            mean_auc_b: mean_std(&column(2)).0,
        });
    }
    timings.mbo = t.elapsed();

    let over_trials = |f: fn(&ConsensusTrial) -> Option<f64>| mean_std(&per_trial.iter().map(f).collect::<Vec<_>>());
    let (mean_auc, std_auc) = over_trials(|t| t.mean_auc);
    timings.total = start.elapsed();
    Ok(ConsensusResult {
        dataset: da.name.clone(),
        labeled_fraction: a.labeled_fraction,
        labeled_count,
        num_splits: a.effective_num_splits(),
        trials,
        method_a: pa,
        method_b: pb,
        mean_auc,
        std_auc,
        mean_auc_a: over_trials(|t| t.mean_auc_a).0,
        mean_auc_b: over_trials(|t| t.mean_auc_b).0,
        per_trial,
        timings,
    })
}

/// AUCs of the consensus, method a and method b on one split.
#[allow(clippy::too_many_arguments)]
fn consensus_split(
    spec_a: &SpectralDecomposition,
    spec_b: &SpectralDecomposition,
    pa: &RunParams,
    pb: &RunParams,
    a: &ExperimentConfig,
    b: &ExperimentConfig,
    split: &SplitSpec,
    labels: &[usize],
) -> Result<[Option<f64>; 3]> {
    if !is_evaluable(split, labels) {
        return Ok([None; 3]);
    }
    let oa = mbo_classify(spec_a, split, labels, &pa.mbo(2, split.seed, a.mbo.early_stop))?;
    let ob = mbo_classify(spec_b, split, labels, &pb.mbo(2, split.seed, b.mbo.early_stop))?;
    let both = consensus(&oa, &ob)?;
    Ok([
        Some(unlabeled_auc(&both, split, labels)?),
        Some(unlabeled_auc(&oa, split, labels)?),
        Some(unlabeled_auc(&ob, split, labels)?),
    ])
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// One line per grid point:
/// `features,n_neighbors,metric,normalization,n_eigs,method,c,dt,n_iters,mean_auc,std_auc,evaluated,skipped`.
pub fn write_summary_csv(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(
        w,
        "features,n_neighbors,metric,normalization,n_eigs,method,c,dt,n_iters,mean_auc,std_auc,evaluated,skipped"
    )
    .map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in &result.configurations {
        let p = &c.params;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.features,
            p.graph.n_neighbors,
            name(&p.graph.metric),
            name(&p.graph.normalization),
            p.n_eigs,
            name(&p.method),
            p.c,
            p.dt,
            p.n_iters,
            opt(c.mean_auc),
            opt(c.std_auc),
            c.per_split_auc.len() - c.skipped,
            c.skipped
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Serialized name of a unit enum variant.
fn name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_ignores_skipped() {
        let (m, s) = mean_std(&[Some(1.0), None, Some(3.0)]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[Some(0.7)]), (Some(0.7), Some(0.0)));
        assert_eq!(mean_std(&[None]), (None, None));
    }

    #[test]
    fn best_prefers_earliest_on_ties() {
        let params = RunParams {
            features: FeatureSource::External { path: "x".into() },
            graph: GraphParams::new(3),
            n_eigs: 2,
            method: Method::Exact,
            sample_size: None,
            c: 1.0,
            dt: 0.1,
            n_iters: 1,
            n_substeps: 3,
        };
        let mk = |aucs: Vec<Option<f64>>| ConfigurationResult::from_aucs(params.clone(), aucs);
        let configs = vec![mk(vec![None]), mk(vec![Some(0.6)]), mk(vec![Some(0.8)]), mk(vec![Some(0.8)])];
        let best = best_of(&configs).unwrap();
        assert!(std::ptr::eq(best, &configs[2]));
        assert!(best_of(&configs[..1]).is_none());
    }
}
