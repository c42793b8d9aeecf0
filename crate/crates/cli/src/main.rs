//! `scarcemol` command-line interface.
//!
//! Exit status is 0 on success, 1 on any runtime error (printed to stderr
//! with its cause chain) and 2 on a usage error.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use scarcemol::dataio::{load_dataset, load_feature_matrix, standardize_features, write_feature_matrix, FeatureMatrix};
use scarcemol::distance::Metric;
use scarcemol::experiment::{
    classify_split, run_consensus, run_experiment, write_json, write_summary_csv, ExperimentConfig, FeatureConfig,
    PreparedData,
};
use scarcemol::fingerprint::{fingerprint_matrix, EcfpParams};
use scarcemol::graph::Normalization;
use scarcemol::metrics::{rs_plot_data, rs_scores, write_rs_csv};
use scarcemol::spectral::Method;
use serde_json::json;

#[derive(Parser)]
#[command(name = "scarcemol", version, about = "Graph MBO classification of scarcely labeled molecular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the ECFP bit matrix of a dataset as a feature CSV.
    Fingerprint {
        /// Dataset CSV with header `smiles,label`.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 4)]
        diameter: u32,
        #[arg(long, default_value_t = 1024)]
        bits: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one random split with one parameter setting.
    Classify(ClassifyArgs),
    /// Run the split-and-average protocol over a hyperparameter grid.
    Experiment {
        /// TOML experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Result JSON.
        #[arg(long)]
        out: PathBuf,
        /// Flat per-configuration CSV (default: `out` with a .csv extension).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Average the probabilities of two single-point configs over shared splits.
    Consensus {
        #[arg(long)]
        config_a: PathBuf,
        #[arg(long)]
        config_b: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluation metrics.
    Metrics {
        #[command(subcommand)]
        command: MetricsCommand,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Residue-similarity scores and indices.
    Rs {
        #[command(flatten)]
        features: FeatureArgs,
        /// CSV with a `predicted` column (as written by `classify`); true
        /// labels color the plot when omitted.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Plot table `index,true_class,predicted_class,residue,similarity`.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON with CRI, CSI, RI, SI and RSI.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FeatureArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// External feature CSV (standardized before use); ECFP when omitted.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    diameter: u32,
    #[arg(long, default_value_t = 1024)]
    bits: usize,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    features: FeatureArgs,
    #[arg(long, default_value_t = 0.05)]
    labeled_fraction: f64,
    /// Index into the seeded split sequence.
    #[arg(long, default_value_t = 0)]
    split: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    stratified: bool,
    #[arg(long, default_value_t = 20)]
    neighbors: usize,
    #[arg(long, value_parser = parse_metric, default_value = "euclidean")]
    metric: Metric,
    #[arg(long)]
    symmetric: bool,
    #[arg(long, default_value_t = 100)]
    n_eigs: usize,
    /// Use the Nyström approximation with this many landmarks.
    #[arg(long)]
    nystrom: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
    #[arg(long, default_value_t = 30)]
    n_iters: usize,
    #[arg(long, default_value_t = 3)]
    n_substeps: usize,
    /// Per-point table `index,label,labeled,predicted,p0,..`.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON summary (parameters, split seed, AUC).
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    match s {
        "euclidean" => Ok(Metric::Euclidean),
        "cosine" => Ok(Metric::Cosine),
        _ => Err(format!("unknown metric `{s}` (euclidean or cosine)")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}

/// The error and its causes, skipping causes whose text the message
/// already contains.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !msg.contains(&c) {
            msg.push_str(": ");
            msg.push_str(&c);
        }
    }
    msg
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fingerprint { dataset, diameter, bits, out } => {
            let ds = load_dataset(&dataset)?;
            let f = fingerprint_matrix(&ds.smiles, &EcfpParams::new(diameter, bits)?)?;
            write_feature_matrix(&f, &out)?;
        }
        Command::Classify(args) => classify(args)?,
        Command::Experiment { config, out, csv } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let result = run_experiment(&cfg)?;
            log::info!("timings: {:?}", result.timings);
            write_json(&result, &out)?;
            write_summary_csv(&result, csv.unwrap_or_else(|| out.with_extension("csv")))?;
            match &result.best {
                Some(b) => eprintln!(
                    "best mean AUC {:.4} ± {:.4} ({} configurations)",
                    b.mean_auc.unwrap_or(f64::NAN),
                    b.std_auc.unwrap_or(f64::NAN),
                    result.configurations.len()
                ),
                None => eprintln!("every split was skipped"),
            }
        }
        Command::Consensus { config_a, config_b, trials, out } => {
            let a = ExperimentConfig::from_file(&config_a)?;
            let b = ExperimentConfig::from_file(&config_b)?;
            let result = run_consensus(&a, &b, trials)?;
            log::info!("timings: {:?}", result.timings);
            write_json(&result, &out)?;
        }
        Command::Metrics { command: MetricsCommand::Rs { features, predictions, out, json } } => {
            let (f, labels) = load_features(&features)?;
            let predicted = match predictions {
                Some(p) => read_predictions(&p, labels.len())?,
                None => Vec::new(),
            };
            let report = rs_scores(&f, &labels, &predicted)?;
            write_rs_csv(&rs_plot_data(&report), &out)?;
            if let Some(path) = json {
                let summary = json!({
                    "cri": report.cri,
                    "csi": report.csi,
                    "ri": report.ri,
                    "si": report.si,
                    "rsi": report.rsi,
                    "epsilon": report.epsilon,
                    "predictions_are_fallback": report.predictions_are_fallback,
                });
                write_json(&summary, &path)?;
            }
        }
    }
    Ok(())
}

/// Dataset labels and the feature matrix the classifier would see.
fn load_features(args: &FeatureArgs) -> Result<(FeatureMatrix, Vec<usize>)> {
    let ds = load_dataset(&args.dataset)?;
    let f = match &args.features {
        Some(path) => standardize_features(&load_feature_matrix(path, ds.len())?),
        None => fingerprint_matrix(&ds.smiles, &EcfpParams::new(args.diameter, args.bits)?)?,
    };
    Ok((f, ds.labels))
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let fa = &args.features;
    let mut cfg = ExperimentConfig::new(&fa.dataset, args.labeled_fraction);
    cfg.num_splits = Some(args.split + 1);
    cfg.seed = args.seed;
    cfg.stratified = args.stratified;
    cfg.features = match &fa.features {
        Some(path) => FeatureConfig::External { path: path.clone(), standardize: true },
        None => FeatureConfig::Ecfp { diameters: vec![fa.diameter], n_bits: vec![fa.bits] },
    };
    cfg.graph.n_neighbors = vec![args.neighbors];
    cfg.graph.metric = args.metric;
    if args.symmetric {
        cfg.graph.normalization = Normalization::Symmetric;
    }
    cfg.spectral.n_eigs = vec![args.n_eigs];
    if let Some(s) = args.nystrom {
        cfg.spectral.method = Method::Nystrom;
        cfg.spectral.sample_size = Some(s);
    }
    cfg.mbo.c = vec![args.c];
    cfg.mbo.dt = vec![args.dt];
    cfg.mbo.n_iters = vec![args.n_iters];
    cfg.mbo.n_substeps = args.n_substeps;
    cfg.validate()?;

    let data = PreparedData::load(&cfg)?;
    let result = classify_split(&cfg, &data, args.split)?;
    write_predictions(&args.out, &data.labels, &result)?;
    if let Some(path) = &args.json {
        let summary = json!({
            "dataset": data.name,
            "params": result.params,
            "split": args.split,
            "split_seed": result.split.seed,
            "labeled_count": result.split.labeled_count,
            "auc": result.auc,
        });
        write_json(&summary, path)?;
    }
    match result.auc {
        Some(auc) => eprintln!("unlabeled AUC {auc:.4}"),
        None => eprintln!("AUC undefined on this split"),
    }
    Ok(())
}

fn write_predictions(path: &Path, labels: &[usize], r: &scarcemol::experiment::Classification) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let probs = r.output.probabilities.values();
    write!(w, "index,label,labeled,predicted")?;
    for k in 0..probs.ncols() {
        write!(w, ",p{k}")?;
    }
    writeln!(w)?;
    for (i, label) in labels.iter().enumerate() {
        write!(w, "{i},{label},{},{}", u8::from(r.split.gamma[i]), r.output.hard_labels[i])?;
        for k in 0..probs.ncols() {
            write!(w, ",{}", probs[(i, k)])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// The `predicted` column of a headed CSV, one row per data point.
fn read_predictions(path: &Path, n: usize) -> Result<Vec<usize>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let Some(col) = header.trim().split(',').position(|h| h == "predicted") else {
        bail!("{}: no `predicted` column", path.display());
    };
    let mut out = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cell = line.split(',').nth(col).unwrap_or("");
        let v =
            cell.trim().parse().with_context(|| format!("{}:{}: bad prediction `{cell}`", path.display(), i + 2))?;
        out.push(v);
    }
    if out.len() != n {
        bail!("{}: {} predictions for {n} data points", path.display(), out.len());
    }
    Ok(out)
}
