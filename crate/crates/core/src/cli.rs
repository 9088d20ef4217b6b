//! Batch front end: `extract`, `train`, `classify` and `evaluate`.
//!
//! Data goes to files and standard output, diagnostics to standard error.
//! Exit codes: 0 success, 1 usage, 2 no input, 3 data error, 4 version
//! mismatch.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;

use crate::apk::{open_package, EvidenceBundle, DEFAULT_MIN_STRING_LEN};
use crate::ensemble::{combine_slice, Scheme};
use crate::eval::{cross_validate, render_tables, write_report, CvConfig, EvalError};
use crate::features::{vectorize, FeatureCatalog, FeatureError, FeatureVector, Label, LabelledSample, SampleMatrix};
use crate::learners::{load_model, save_model, train, Algorithm, LearnError, TrainOptions, TrainedModel};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NoInput(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Version(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::NoInput(_) => 2,
            Self::Data(_) => 3,
            Self::Version(_) => 4,
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::SchemaMismatch(_) => Self::Version(e.to_string()),
            LearnError::Io { .. } => Self::NoInput(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Learn(inner) => inner.into(),
            other => Self::Data(other.to_string()),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "droidscan", version, about = "Static keyword screening of Android packages")]
pub struct Cli {
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a directory of APKs into a feature matrix CSV.
    Extract(ExtractArgs),
    /// Train base classifiers on a matrix and write one model file each.
    Train(TrainArgs),
    /// Score packages or matrix rows with a directory of trained models.
    Classify(ClassifyArgs),
    /// Stratified cross-validation of every classifier and combiner.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    /// Directory searched recursively for `*.apk` files.
    #[arg(long)]
    pub apk_dir: PathBuf,
    /// Feature catalog file; the bundled catalog when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// `sample_id,label` CSV; without it every row is labelled benign.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_STRING_LEN)]
    pub min_string_len: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Comma-separated algorithm tags (nb, sl, dt, ridor, part) or `all`.
    #[arg(long, default_value = "all")]
    pub algo: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["apk", "matrix"])))]
pub struct ClassifyArgs {
    /// Directory holding `<algo>.json` model files.
    #[arg(long)]
    pub models: PathBuf,
    /// An APK file or a directory of them.
    #[arg(long)]
    pub apk: Option<PathBuf>,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Catalog used to vectorize `--apk` input; the bundled one when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// avg, prod, max or vote.
    #[arg(long, default_value = "prod")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = DEFAULT_MIN_STRING_LEN)]
    pub min_string_len: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// JSON report path; ROC curves go next to it.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value = "all")]
    pub algo: String,
    /// Comma-separated schemes or `all`.
    #[arg(long, default_value = "all")]
    pub scheme: String,
}

fn parse_list<T>(text: &str, all: &[T]) -> Result<Vec<T>, CliError>
where
    T: Copy + std::str::FromStr<Err = String>,
{
    if text == "all" {
        return Ok(all.to_vec());
    }
    let items = text
        .split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Usage)?;
    if items.is_empty() {
        return Err(CliError::Usage("empty list".into()));
    }
    Ok(items)
}

fn load_catalog(path: Option<&Path>) -> Result<FeatureCatalog, CliError> {
    match path {
        None => Ok(FeatureCatalog::default_catalog()),
        Some(p) => FeatureCatalog::load(p).map_err(|e| CliError::Usage(format!("catalog: {e}"))),
    }
}

/// Reads a `sample_id,label` CSV. A header row is optional.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, Label>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut labels = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "sample_id,label") {
            continue;
        }
        let (id, label) = line
            .rsplit_once(',')
            .ok_or_else(|| CliError::Data(format!("{}:{}: expected sample_id,label", path.display(), i + 1)))?;
        let label: Label = label
            .trim()
            .parse()
            .map_err(|v| CliError::Data(format!("{}:{}: bad label {v:?}", path.display(), i + 1)))?;
        if labels.insert(id.trim().to_string(), label).is_some() {
            return Err(CliError::Data(format!("{}: duplicate sample id {id:?}", path.display())));
        }
    }
    Ok(labels)
}

/// `*.apk` files under `root` (or `root` itself), keyed by their path
/// relative to `root` with `/` separators, in sorted order.
pub fn find_apks(root: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    if root.is_file() {
        let id = root.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        return Ok(vec![(id, root.to_path_buf())]);
    }
    if !root.is_dir() {
        return Err(CliError::NoInput(format!("{}: not a file or directory", root.display())));
    }
    let mut found = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::NoInput(e.to_string()))?;
        let path = entry.path();
        let is_apk = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("apk"));
        if entry.file_type().is_file() && is_apk {
            let rel = path.strip_prefix(root).unwrap_or(path);
            let id = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            found.push((id, path.to_path_buf()));
        }
    }
    found.sort();
    Ok(found)
}

/// Parses and vectorizes packages in parallel, keeping input order.
/// Files that fail to open are logged and dropped.
fn vectorize_apks(apks: &[(String, PathBuf)], catalog: &FeatureCatalog, min_len: usize) -> Vec<FeatureVector> {
    apks.par_iter()
        .map(|(id, path)| match open_package(path) {
            Ok(pkg) => {
                let evidence = EvidenceBundle::collect(&pkg, min_len);
                for w in &evidence.warnings {
                    warn!("{id}: {w}");
                }
                Some(vectorize(id.as_str(), &evidence, catalog))
            }
            Err(e) => {
                warn!("{id}: {e}");
                None
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn cmd_extract(args: &ExtractArgs) -> Result<SampleMatrix, CliError> {
    let catalog = load_catalog(args.catalog.as_deref())?;
    let labels = args.labels.as_deref().map(read_labels).transpose()?;
    if labels.is_none() {
        warn!("no labels file; every row is labelled benign");
    }
    let apks = find_apks(&args.apk_dir)?;
    let vectors = vectorize_apks(&apks, &catalog, args.min_string_len);
    let mut samples = Vec::with_capacity(vectors.len());
    for v in vectors {
        let label = match &labels {
            None => Label::Benign,
            Some(map) => match map.get(&v.sample_id) {
                Some(&l) => l,
                None => {
                    warn!("{}: not in labels file, skipped", v.sample_id);
                    continue;
                }
            },
        };
        samples.push(LabelledSample::new(v, label));
    }
    if samples.is_empty() {
        return Err(CliError::NoInput("no packages parsed".into()));
    }
    info!("{} of {} packages vectorized", samples.len(), apks.len());
    let matrix = SampleMatrix::new(catalog, samples)?;
    matrix.write(&args.out)?;
    Ok(matrix)
}

fn model_path(dir: &Path, algorithm: Algorithm) -> PathBuf {
    dir.join(format!("{}.json", algorithm.tag()))
}

fn read_matrix(path: &Path) -> Result<SampleMatrix, CliError> {
    SampleMatrix::read(path).map_err(|e| match e {
        FeatureError::Io { .. } => CliError::NoInput(e.to_string()),
        other => other.into(),
    })
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<Vec<TrainedModel>, CliError> {
    let algorithms = parse_list(&args.algo, &Algorithm::ALL)?;
    let matrix = read_matrix(&args.matrix)?;
    std::fs::create_dir_all(&args.out_dir).map_err(io_error(&args.out_dir))?;
    let opts = TrainOptions::with_seed(args.seed);
    let models = algorithms
        .par_iter()
        .map(|&a| train(a, &matrix, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    for model in &models {
        let path = model_path(&args.out_dir, model.algorithm());
        save_model(model, &path)?;
        writeln!(out, "{}: {}", model.algorithm(), model.summary()).map_err(io_error(&path))?;
    }
    Ok(models)
}

/// Every `<algo>.json` in `dir`, in committee order.
fn load_committee(dir: &Path) -> Result<Vec<TrainedModel>, CliError> {
    let mut models = Vec::new();
    for a in Algorithm::ALL {
        let path = model_path(dir, a);
        if path.exists() {
            let model = load_model(&path)?;
            if model.algorithm() != a {
                return Err(CliError::Data(format!("{} holds a {} model", path.display(), model.algorithm())));
            }
            models.push(model);
        }
    }
    if models.is_empty() {
        return Err(CliError::NoInput(format!("{}: no model files", dir.display())));
    }
    let version = &models[0].catalog_version;
    if let Some(m) = models.iter().find(|m| &m.catalog_version != version) {
        return Err(CliError::Version(format!(
            "models disagree on catalog version ({version} vs {})",
            m.catalog_version
        )));
    }
    Ok(models)
}

fn format_row(id: &str, models: &[TrainedModel], bits: &[bool], scheme: Scheme) -> Result<String, CliError> {
    let posteriors = models.iter().map(|m| m.predict(bits)).collect::<Result<Vec<_>, _>>()?;
    let (verdict, score) = combine_slice(&posteriors, scheme);
    let mut row = format!("{id},{verdict},{score}");
    for p in &posteriors {
        row.push_str(&format!(",{}", p.p_sus));
    }
    Ok(row)
}

pub fn cmd_classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let models = load_committee(&args.models)?;
    let version = models[0].catalog_version.clone();
    let vectors = match (&args.matrix, &args.apk) {
        (Some(path), _) => {
            let matrix = read_matrix(path)?;
            if matrix.catalog().version() != version {
                return Err(CliError::Version(format!(
                    "matrix catalog {} does not match model catalog {version}",
                    matrix.catalog().version()
                )));
            }
            matrix.samples().iter().map(|s| s.vector.clone()).collect::<Vec<_>>()
        }
        (None, Some(path)) => {
            let catalog = load_catalog(args.catalog.as_deref())?;
            if catalog.version() != version {
                return Err(CliError::Version(format!(
                    "catalog {} does not match model catalog {version}",
                    catalog.version()
                )));
            }
            let apks = find_apks(path)?;
            let vectors = vectorize_apks(&apks, &catalog, args.min_string_len);
            if vectors.is_empty() {
                return Err(CliError::NoInput("no packages parsed".into()));
            }
            vectors
        }
        (None, None) => return Err(CliError::Usage("--apk or --matrix is required".into())),
    };
    let mut text = String::from("sample_id,verdict,score_sus");
    for m in &models {
        text.push_str(&format!(",p_{}", m.algorithm()));
    }
    text.push('\n');
    for v in &vectors {
        text.push_str(&format_row(&v.sample_id, &models, &v.bits, args.scheme)?);
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(|e| CliError::Data(e.to_string()))
}

pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = CvConfig {
        folds: args.folds as usize,
        seed: args.seed,
        algorithms: parse_list(&args.algo, &Algorithm::ALL)?,
        schemes: parse_list(&args.scheme, &Scheme::ALL)?,
    };
    let matrix = read_matrix(&args.matrix)?;
    let report = cross_validate(&matrix, &config)?;
    write_report(&report, &args.report)?;
    out.write_all(render_tables(&report).as_bytes())
        .map_err(|e| CliError::Data(e.to_string()))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Runs one invocation and returns its exit code. Data goes to `out`,
/// errors and logs to standard error.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    let result = match &cli.command {
        Command::Extract(a) => cmd_extract(a).map(|_| ()),
        Command::Train(a) => cmd_train(a, out).map(|_| ()),
        Command::Classify(a) => cmd_classify(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(std::env::args_os(), &mut lock)
}
