//! Experiment configuration: a TOML document describing the dataset, the
//! feature source and the hyperparameter grids.
//!
//! ```toml
//! dataset = "bace.csv"          # relative to the config file
//! labeled_fraction = 0.05
//! num_splits = 50               # default: 50 if fraction <= 5%, else 10
//! seed = 0
//! stratified = false
//! cache_dir = "spectral-cache"  # optional
//!
//! [features]
//! source = "ecfp"               # or "external" with `path` and `standardize`
//! diameters = [2, 4, 6]
//! n_bits = [512, 1024, 2048]
//!
//! [graph]
//! n_neighbors = [10, 20, 50]
//! metric = "euclidean"          # or "cosine"
//! normalization = "unnormalized" # or "symmetric"
//! # k_sigma = 5                 # local scaling neighbor (default ceil(N_n / 2))
//! # sigma = 1.0                 # global bandwidth instead of local scaling
//!
//! [spectral]
//! n_eigs = [50, 100, 200]
//! method = "exact"              # or "nystrom" with `sample_size`
//!
//! [mbo]
//! c = [1.0, 10.0, 100.0]
//! dt = [0.1, 0.5, 1.0]
//! n_iters = [30, 100]
//! n_substeps = 3
//! early_stop = false
//! ```
//!
//! Every section and every key except `dataset` and `labeled_fraction` is
//! optional.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataio::labeled_count_for_fraction;
use crate::distance::Metric;
use crate::error::{Error, Result};
use crate::fingerprint::EcfpParams;
use crate::graph::{GraphParams, Normalization, Scaling};
use crate::spectral::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub labeled_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_splits: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stratified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub graph: GraphGrid,
    #[serde(default)]
    pub spectral: SpectralGrid,
    #[serde(default)]
    pub mbo: MboGrid,
}

/// Where the feature matrices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum FeatureConfig {
    /// ECFP over every (diameter, n_bits) pair.
    Ecfp {
        #[serde(default = "default_diameters")]
        diameters: Vec<u32>,
        #[serde(default = "default_n_bits")]
        n_bits: Vec<usize>,
    },
    /// A precomputed feature CSV in dataset row order.
    External {
        path: PathBuf,
        #[serde(default = "yes")]
        standardize: bool,
    },
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::Ecfp { diameters: default_diameters(), n_bits: default_n_bits() }
    }
}

/// One point of the feature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureSource {
    Ecfp(EcfpParams),
    External { path: PathBuf },
}

impl fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSource::Ecfp(p) => write!(f, "ECFP{}_{}", p.diameter, p.n_bits),
            FeatureSource::External { path } => write!(f, "external:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphGrid {
    #[serde(default = "default_n_neighbors")]
    pub n_neighbors: Vec<usize>,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_sigma: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl Default for GraphGrid {
    fn default() -> Self {
        GraphGrid {
            n_neighbors: default_n_neighbors(),
            metric: Metric::Euclidean,
            normalization: Normalization::Unnormalized,
            k_sigma: None,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralGrid {
    #[serde(default = "default_n_eigs")]
    pub n_eigs: Vec<usize>,
    #[serde(default = "exact")]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        SpectralGrid { n_eigs: default_n_eigs(), method: Method::Exact, sample_size: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MboGrid {
    #[serde(default = "default_c")]
    pub c: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: Vec<f64>,
    #[serde(default = "default_n_iters")]
    pub n_iters: Vec<usize>,
    #[serde(default = "default_n_substeps")]
    pub n_substeps: usize,
    #[serde(default)]
    pub early_stop: bool,
}

impl Default for MboGrid {
    fn default() -> Self {
        MboGrid {
            c: default_c(),
            dt: default_dt(),
            n_iters: default_n_iters(),
            n_substeps: default_n_substeps(),
            early_stop: false,
        }
    }
}

fn default_diameters() -> Vec<u32> {
    vec![2, 4, 6]
}
fn default_n_bits() -> Vec<usize> {
    vec![512, 1024, 2048]
}
fn default_n_neighbors() -> Vec<usize> {
    vec![10, 20, 50]
}
fn default_n_eigs() -> Vec<usize> {
    vec![50, 100, 200]
}
fn default_c() -> Vec<f64> {
    vec![1.0, 10.0, 100.0]
}
fn default_dt() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}
fn default_n_iters() -> Vec<usize> {
    vec![30, 100]
}
fn default_n_substeps() -> usize {
    3
}
fn exact() -> Method {
    Method::Exact
}
fn yes() -> bool {
    true
}

/// 50 splits at labeled fractions up to 5%, 10 above.
pub fn default_num_splits(labeled_fraction: f64) -> usize {
    if labeled_fraction <= 0.05 + 1e-12 {
        50
    } else {
        10
    }
}

impl ExperimentConfig {
    /// A config with every grid at its default.
    pub fn new(dataset: impl Into<PathBuf>, labeled_fraction: f64) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            labeled_fraction,
            num_splits: None,
            seed: 0,
            stratified: false,
            cache_dir: None,
            features: FeatureConfig::default(),
            graph: GraphGrid::default(),
            spectral: SpectralGrid::default(),
            mbo: MboGrid::default(),
        }
    }

    /// Parses TOML; relative paths are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base).map_err(|e| e.context(format!("reading {}", path.display())))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut self.dataset);
        if let Some(dir) = self.cache_dir.as_mut() {
            resolve(dir);
        }
        if let FeatureConfig::External { path, .. } = &mut self.features {
            resolve(path);
        }
    }

    pub fn effective_num_splits(&self) -> usize {
        self.num_splits.unwrap_or_else(|| default_num_splits(self.labeled_fraction))
    }

    /// Checks grids and ranges that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.labeled_fraction > 0.0 && self.labeled_fraction < 1.0) {
            return bad(format!("labeled_fraction must lie in (0, 1), got {}", self.labeled_fraction));
        }
        if self.effective_num_splits() == 0 {
            return bad("num_splits must be at least 1".into());
        }
        if let FeatureConfig::Ecfp { diameters, n_bits } = &self.features {
            if diameters.is_empty() || n_bits.is_empty() {
                return bad("empty ECFP grid".into());
            }
            for &d in diameters {
                for &b in n_bits {
                    EcfpParams::new(d, b)?;
                }
            }
        }
        let g = &self.graph;
        if g.n_neighbors.is_empty() || self.spectral.n_eigs.is_empty() {
            return bad("empty graph or spectral grid".into());
        }
        if g.n_neighbors.contains(&0) || self.spectral.n_eigs.contains(&0) {
            return bad("n_neighbors and n_eigs must be positive".into());
        }
        if let Some(s) = g.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("sigma must be positive, got {s}"));
            }
        }
        if self.spectral.method == Method::Nystrom {
            let Some(s) = self.spectral.sample_size else {
                return bad("the nystrom method needs spectral.sample_size".into());
            };
            if let Some(&ne) = self.spectral.n_eigs.iter().find(|&&ne| ne > s) {
                return bad(format!("n_eigs {ne} exceeds sample_size {s}"));
            }
        }
        let m = &self.mbo;
        if m.c.is_empty() || m.dt.is_empty() || m.n_iters.is_empty() {
            return bad("empty MBO grid".into());
        }
        if m.c.iter().chain(&m.dt).any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("c and dt must be positive".into());
        }
        if m.n_substeps == 0 {
            return bad("n_substeps must be at least 1".into());
        }
        Ok(())
    }

    /// Checks the parts that depend on the number of data points.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        let labeled = labeled_count_for_fraction(n, self.labeled_fraction);
        if labeled >= n {
            return Err(Error::Config(format!(
                "labeled fraction {} leaves no unlabeled points among {n}",
                self.labeled_fraction
            )));
        }
        if let Some(&k) = self.graph.n_neighbors.iter().find(|&&k| k >= n) {
            return Err(Error::Config(format!("n_neighbors {k} must be below N = {n}")));
        }
        if let Some(&ne) = self.spectral.n_eigs.iter().find(|&&ne| ne > n) {
            return Err(Error::Config(format!("n_eigs {ne} exceeds N = {n}")));
        }
        if let Some(s) = self.spectral.sample_size.filter(|&s| s > n) {
            return Err(Error::Config(format!("sample_size {s} exceeds N = {n}")));
        }
        for p in self.graph_params() {
            p.validate(n)?;
        }
        Ok(())
    }

    /// Feature grid, diameter-major.
    pub fn feature_sources(&self) -> Vec<FeatureSource> {
        match &self.features {
            FeatureConfig::Ecfp { diameters, n_bits } => diameters
                .iter()
                .flat_map(|&d| n_bits.iter().map(move |&b| FeatureSource::Ecfp(EcfpParams { diameter: d, n_bits: b })))
                .collect(),
            FeatureConfig::External { path, .. } => {
                vec![FeatureSource::External { path: path.clone() }]
            }
        }
    }

    pub fn graph_params(&self) -> Vec<GraphParams> {
        let g = &self.graph;
        g.n_neighbors
            .iter()
            .map(|&k| {
                let mut p = GraphParams::new(k).with_metric(g.metric).with_normalization(g.normalization);
                if let Some(ks) = g.k_sigma {
                    p.scaling = Scaling::Local { k_sigma: ks };
                }
                if let Some(s) = g.sigma {
                    p = p.with_global_sigma(s);
                }
                p
            })
            .collect()
    }

    /// Number of grid points.
    pub fn grid_size(&self) -> usize {
        self.feature_sources().len()
            * self.graph.n_neighbors.len()
            * self.spectral.n_eigs.len()
            * self.mbo.c.len()
            * self.mbo.dt.len()
            * self.mbo.n_iters.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg =
            ExperimentConfig::from_toml_str("dataset = \"beet.csv\"\nlabeled_fraction = 0.05\n", Path::new("/data"))
                .unwrap();
        assert_eq!(cfg.dataset, PathBuf::from("/data/beet.csv"));
        assert_eq!(cfg.effective_num_splits(), 50);
        assert_eq!(cfg.feature_sources().len(), 9);
        assert_eq!(cfg.grid_size(), 9 * 3 * 3 * 3 * 3 * 2);
        assert_eq!(cfg.feature_sources()[1].to_string(), "ECFP2_1024");
        cfg.validate().unwrap();
    }

    #[test]
    fn ten_splits_above_five_percent() {
        let cfg = ExperimentConfig::new("x.csv", 0.9);
        assert_eq!(cfg.effective_num_splits(), 10);
    }

    #[test]
    fn external_features_and_overrides() {
        let text = r#"
            dataset = "ames.csv"
            labeled_fraction = 0.02
            num_splits = 5
            [features]
            source = "external"
            path = "bt.csv"
            [graph]
            n_neighbors = [15]
            sigma = 2.0
            [spectral]
            n_eigs = [20]
            method = "nystrom"
            sample_size = 100
        "#;
        let cfg = ExperimentConfig::from_toml_str(text, Path::new("d")).unwrap();
        assert_eq!(cfg.features, FeatureConfig::External { path: PathBuf::from("d/bt.csv"), standardize: true });
        assert_eq!(cfg.graph_params()[0].scaling, Scaling::Global { sigma: 2.0 });
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml_str("labeled_fraction = 0.1", Path::new("")).is_err());
        let typo = "dataset = \"a\"\nlabeled_fraction = 0.1\n[mbo]\nC = [1.0]\n";
        assert!(ExperimentConfig::from_toml_str(typo, Path::new("")).is_err());

        let mut cfg = ExperimentConfig::new("a.csv", 1.0);
        assert!(cfg.validate().is_err());
        cfg.labeled_fraction = 0.5;
        cfg.mbo.dt.clear();
        assert!(cfg.validate().is_err());
        cfg.mbo = MboGrid::default();
        cfg.spectral.method = Method::Nystrom;
        assert!(cfg.validate().is_err());
        cfg.spectral = SpectralGrid::default();
        assert!(cfg.validate_for(30).is_err());
    }
}
