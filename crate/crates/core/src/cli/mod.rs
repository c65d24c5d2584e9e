//! The `aspecteval` command line.
//!
//! Every option can also be set through an `ASPECTEVAL_*` environment
//! variable (`--theta` ↔ `ASPECTEVAL_THETA`, ...). Exit codes: 0 on success,
//! 2 for invalid input or configuration, 3 when the embedding provider fails.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{build_backend, BackendSpec, EmbeddingConfig, InputDigest, RunConfig};

use crate::error::{Error, Result};
use crate::io::{self, CorpusFormat, CorpusSummary, PredictionFile};
use crate::matching::Theta;
use crate::metrics::{macro_evaluate, EvalOptions, EvaluationReport};
use crate::model::{ConflictPolicy, Corpus, NormalizedPhrase, PredictionRecord};
use crate::stats::{
    bin_values, fleiss_kappa, paired_bootstrap, theta_sweep, Binning, BootstrapResult, Grid,
    KappaResult, RatingsTable, ReviewLabels, SystemPredictions,
};

/// Significance level used by `compare`.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "aspecteval", version, about = "Generalized precision/recall for aspect extraction")]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "ASPECTEVAL_JOBS", default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a dataset into canonical JSONL.
    Convert {
        input: PathBuf,
        #[arg(long, env = "ASPECTEVAL_FORMAT", value_parser = parse_format)]
        format: CorpusFormat,
        #[arg(long, env = "ASPECTEVAL_OUT")]
        out: PathBuf,
        /// Skip documents without any gold aspect.
        #[arg(long)]
        drop_empty: bool,
    },
    /// Print document, aspect and polarity counts of a dataset.
    Summary {
        input: PathBuf,
        #[arg(long, env = "ASPECTEVAL_FORMAT", value_parser = parse_format, default_value = "canonical")]
        format: CorpusFormat,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
        /// Skip documents without any gold aspect.
        #[arg(long)]
        drop_empty: bool,
    },
    /// Score one system: writes report.json and documents.csv.
    Evaluate {
        gold: PathBuf,
        predictions: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[arg(long, env = "ASPECTEVAL_OUT", default_value = ".")]
        out: PathBuf,
    },
    /// Paired bootstrap test of system A against system B: writes compare.json.
    Compare {
        gold: PathBuf,
        predictions_a: PathBuf,
        predictions_b: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[arg(long, env = "ASPECTEVAL_SEED", default_value_t = crate::stats::bootstrap::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, env = "ASPECTEVAL_ITERATIONS", default_value_t = crate::stats::bootstrap::DEFAULT_ITERATIONS)]
        iterations: usize,
        /// Per-document metric to compare: f1, precision or recall.
        #[arg(long, default_value = "f1", value_parser = ["f1", "precision", "recall"])]
        metric: String,
        #[arg(long, env = "ASPECTEVAL_OUT", default_value = ".")]
        out: PathBuf,
    },
    /// Audit semantic matches over a grid of thresholds: writes sweep.csv,
    /// pairs.csv and sweep.json.
    Sweep {
        gold: PathBuf,
        #[arg(required = true)]
        predictions: Vec<PathBuf>,
        #[command(flatten)]
        scoring: ScoringArgs,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long, env = "ASPECTEVAL_GRID", default_value = "0.025:1:0.025")]
        grid: String,
        /// Reviewer verdicts, CSV with columns detected,gold,valid.
        #[arg(long, env = "ASPECTEVAL_LABELS")]
        labels: Option<PathBuf>,
        #[arg(long, env = "ASPECTEVAL_OUT", default_value = ".")]
        out: PathBuf,
    },
    /// Fleiss' kappa of a ratings CSV with columns item,rater,value.
    Kappa {
        ratings: PathBuf,
        /// `none` (values are categories), `quartiles` or comma-separated edges.
        #[arg(long, env = "ASPECTEVAL_BINS", default_value = "none")]
        bins: String,
        #[arg(long, env = "ASPECTEVAL_OUT", default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ScoringArgs {
    #[arg(long, env = "ASPECTEVAL_THETA", default_value_t = Theta::DEFAULT.value())]
    pub theta: f64,
    /// exact, char-ngram[:N], embedding or oracle:FILE.
    #[arg(long, env = "ASPECTEVAL_BACKEND", default_value = "exact")]
    pub backend: String,
    /// Base URL of the embedding service (POST {url}/embed).
    #[arg(long, env = "ASPECTEVAL_PROVIDER_URL")]
    pub provider_url: Option<String>,
    #[arg(long, env = "ASPECTEVAL_MODEL", default_value = "sentence-t5-large")]
    pub model: String,
    /// Embedding cache (JSONL); without a provider URL only cached vectors are used.
    #[arg(long, env = "ASPECTEVAL_CACHE")]
    pub cache: Option<PathBuf>,
    #[arg(long, env = "ASPECTEVAL_CONFLICT_POLICY", default_value = "fold-to-neutral", value_parser = parse_policy)]
    pub conflict_policy: ConflictPolicy,
}

fn parse_format(s: &str) -> std::result::Result<CorpusFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_policy(s: &str) -> std::result::Result<ConflictPolicy, String> {
    match s {
        "fold-to-neutral" => Ok(ConflictPolicy::FoldToNeutral),
        "strict" => Ok(ConflictPolicy::Strict),
        _ => Err(format!("expected fold-to-neutral or strict, got {s:?}")),
    }
}

/// Validated scoring settings.
pub struct Scoring {
    pub theta: Theta,
    pub backend: BackendSpec,
    pub embedding: EmbeddingConfig,
    pub policy: ConflictPolicy,
}

impl ScoringArgs {
    pub fn validate(&self) -> Result<Scoring> {
        Ok(Scoring {
            theta: Theta::new(self.theta)?,
            backend: self.backend.parse()?,
            embedding: EmbeddingConfig {
                provider_url: self.provider_url.clone(),
                model: self.model.clone(),
                cache: self.cache.clone(),
            },
            policy: self.conflict_policy,
        })
    }
}

impl Scoring {
    fn record(&self, config: &mut RunConfig) -> Result<()> {
        config.theta = Some(self.theta.value());
        config.backend = Some(self.backend.clone());
        config.conflict_policy = Some(self.policy);
        match &self.backend {
            BackendSpec::Embedding => config.embedding = Some(self.embedding.clone()),
            BackendSpec::Oracle(path) => config.input("similarity-oracle", path)?,
            _ => {}
        }
        Ok(())
    }
}

/// Parse arguments, run, report errors on stderr and map them to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Convert {
            input,
            format,
            out,
            drop_empty,
        } => cmd_convert(&input, format, &out, drop_empty),
        Command::Summary {
            input,
            format,
            json,
            drop_empty,
        } => cmd_summary(&input, format, json, drop_empty),
        Command::Evaluate {
            gold,
            predictions,
            scoring,
            out,
        } => cmd_evaluate(&gold, &predictions, &scoring.validate()?, &out).map(|_| ()),
        Command::Compare {
            gold,
            predictions_a,
            predictions_b,
            scoring,
            seed,
            iterations,
            metric,
            out,
        } => cmd_compare(
            &gold,
            [&predictions_a, &predictions_b],
            &scoring.validate()?,
            seed,
            iterations,
            &metric,
            &out,
        )
        .map(|_| ()),
        Command::Sweep {
            gold,
            predictions,
            scoring,
            grid,
            labels,
            out,
        } => cmd_sweep(&gold, &predictions, &scoring.validate()?, &grid, labels.as_deref(), &out),
        Command::Kappa { ratings, bins, out } => cmd_kappa(&ratings, &bins, &out).map(|_| ()),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn load_filtered(input: &Path, format: CorpusFormat, drop_empty: bool) -> Result<Corpus> {
    let corpus = io::load_corpus(input, format)?;
    Ok(if drop_empty {
        corpus.retain(|d| !d.gold.is_empty())
    } else {
        corpus
    })
}

fn cmd_convert(input: &Path, format: CorpusFormat, out: &Path, drop_empty: bool) -> Result<()> {
    let corpus = load_filtered(input, format, drop_empty)?;
    let mut buf = Vec::new();
    io::write_corpus(&mut buf, corpus.documents())?;
    write_file(out, &buf)?;
    println!("{}", CorpusSummary::of(&corpus));
    Ok(())
}

fn cmd_summary(input: &Path, format: CorpusFormat, json: bool, drop_empty: bool) -> Result<()> {
    let summary = CorpusSummary::of(&load_filtered(input, format, drop_empty)?);
    if json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!("{summary}");
    }
    Ok(())
}

fn load_predictions_reporting(path: &Path) -> Result<Vec<PredictionRecord>> {
    let PredictionFile {
        records,
        diagnostics,
    } = io::load_predictions(path)?;
    for (doc, message) in &diagnostics {
        eprintln!("warning: {}: document {doc:?}: {message}", path.display());
    }
    Ok(records)
}

fn phrases(corpus: &Corpus, predictions: &[&[PredictionRecord]]) -> Vec<NormalizedPhrase> {
    let gold = corpus.iter().flat_map(|d| d.gold.phrases());
    let detected = predictions
        .iter()
        .flat_map(|p| p.iter().flat_map(|r| r.detected.phrases()));
    gold.chain(detected).collect()
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    config: &'a RunConfig,
    warnings: Vec<String>,
    report: &'a EvaluationReport,
}

/// `evaluate`: returns the report that was written.
pub fn cmd_evaluate(
    gold: &Path,
    predictions: &Path,
    scoring: &Scoring,
    out: &Path,
) -> Result<EvaluationReport> {
    let mut config = RunConfig::new("evaluate", out);
    scoring.record(&mut config)?;
    config.input("gold", gold)?;
    config.input("predictions", predictions)?;

    let corpus = io::load_corpus(gold, CorpusFormat::Canonical)?;
    let records = load_predictions_reporting(predictions)?;
    let backend = build_backend(
        &scoring.backend,
        &scoring.embedding,
        phrases(&corpus, &[&records]),
    )?;
    let options = EvalOptions {
        conflict_policy: scoring.policy,
    };
    let report = macro_evaluate(&corpus, &records, scoring.theta, &backend, &options)?;

    out_dir(out)?;
    write_json(
        &out.join("report.json"),
        &EvaluateOutput {
            config: &config,
            warnings: report.warnings.clone(),
            report: &report,
        },
    )?;
    let mut csv = Vec::new();
    report.write_documents_csv(&mut csv)?;
    write_file(&out.join("documents.csv"), &csv)?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let g = &report.generalized;
    println!(
        "theta={} backend={} documents={}  P={:.4} R={:.4} F1={:.4}",
        report.theta, report.backend, g.documents, g.precision, g.recall, g.f1
    );
    Ok(report)
}

/// Body of `compare.json`.
#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub metric: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub observed_delta: f64,
    pub p_value: f64,
    pub iterations: usize,
    pub seed: u64,
    pub alpha: f64,
    pub significant: bool,
    pub provenance: RunConfig,
}

pub fn cmd_compare(
    gold: &Path,
    predictions: [&Path; 2],
    scoring: &Scoring,
    seed: u64,
    iterations: usize,
    metric: &str,
    out: &Path,
) -> Result<CompareReport> {
    let mut config = RunConfig::new("compare", out);
    scoring.record(&mut config)?;
    config.seed = Some(seed);
    config.iterations = Some(iterations);
    config.input("gold", gold)?;
    config.input("predictions-a", predictions[0])?;
    config.input("predictions-b", predictions[1])?;

    let corpus = io::load_corpus(gold, CorpusFormat::Canonical)?;
    let (a, b) = rayon::join(
        || load_predictions_reporting(predictions[0]),
        || load_predictions_reporting(predictions[1]),
    );
    let (a, b) = (a?, b?);
    let backend = build_backend(
        &scoring.backend,
        &scoring.embedding,
        phrases(&corpus, &[&a, &b]),
    )?;
    let options = EvalOptions {
        conflict_policy: scoring.policy,
    };
    let scores = |records: &[PredictionRecord]| -> Result<(Vec<f64>, f64)> {
        let report = macro_evaluate(&corpus, records, scoring.theta, &backend, &options)?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        let values: Vec<f64> = report
            .documents
            .iter()
            .map(|d| match metric {
                "precision" => d.generalized.precision,
                "recall" => d.generalized.recall,
                _ => d.generalized.f1,
            })
            .collect();
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        Ok((values, mean))
    };
    let (scores_a, mean_a) = scores(&a)?;
    let (scores_b, mean_b) = scores(&b)?;
    let BootstrapResult {
        observed_delta,
        p_value,
        iterations,
        seed,
    } = paired_bootstrap(&scores_a, &scores_b, iterations, seed)?;

    let report = CompareReport {
        metric: metric.to_string(),
        mean_a,
        mean_b,
        observed_delta,
        p_value,
        iterations,
        seed,
        alpha: ALPHA,
        significant: p_value < ALPHA,
        provenance: config,
    };
    out_dir(out)?;
    write_json(&out.join("compare.json"), &report)?;
    println!(
        "{metric}: A={mean_a:.4} B={mean_b:.4} delta={observed_delta:.4} p={p_value:.5} significant={}",
        report.significant
    );
    Ok(report)
}

#[derive(Serialize)]
struct SweepJson<'a> {
    config: &'a RunConfig,
    systems: Vec<String>,
    rows: &'a [crate::stats::SweepRow],
}

/// System names from file stems, made unique with a numeric suffix.
fn system_names(paths: &[PathBuf]) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let stem = p
            .file_stem()
            .map_or_else(|| format!("system{i}"), |s| s.to_string_lossy().into_owned());
        let name = if names.contains(&stem) {
            format!("{stem}#{i}")
        } else {
            stem
        };
        names.push(name);
    }
    names
}

pub fn cmd_sweep(
    gold: &Path,
    predictions: &[PathBuf],
    scoring: &Scoring,
    grid_spec: &str,
    labels: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let grid = Grid::parse(grid_spec)?;
    let mut config = RunConfig::new("sweep", out);
    scoring.record(&mut config)?;
    config.theta = None;
    config.grid = Some(grid_spec.to_string());
    config.input("gold", gold)?;
    for p in predictions {
        config.input("predictions", p)?;
    }
    if let Some(l) = labels {
        config.input("labels", l)?;
    }

    let corpus = io::load_corpus(gold, CorpusFormat::Canonical)?;
    let systems: Vec<SystemPredictions> = system_names(predictions)
        .into_iter()
        .zip(predictions)
        .map(|(system, path)| {
            Ok(SystemPredictions {
                system,
                predictions: load_predictions_reporting(path)?,
            })
        })
        .collect::<Result<_>>()?;
    let labels = labels.map(ReviewLabels::from_csv_path).transpose()?;
    let backend = build_backend(
        &scoring.backend,
        &scoring.embedding,
        phrases(
            &corpus,
            &systems.iter().map(|s| s.predictions.as_slice()).collect::<Vec<_>>(),
        ),
    )?;
    let output = theta_sweep(&corpus, &systems, &grid, &backend, labels.as_ref())?;

    out_dir(out)?;
    let mut buf = Vec::new();
    output.write_rows_csv(&mut buf)?;
    write_file(&out.join("sweep.csv"), &buf)?;
    buf.clear();
    output.write_pairs_csv(&mut buf)?;
    write_file(&out.join("pairs.csv"), &buf)?;
    write_json(
        &out.join("sweep.json"),
        &SweepJson {
            config: &config,
            systems: systems.iter().map(|s| s.system.clone()).collect(),
            rows: &output.rows,
        },
    )?;
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    for row in &output.rows {
        let _ = writeln!(
            stdout,
            "theta={:<6} matched={:<6} non_exact={}",
            row.theta.to_string(),
            row.matched_pairs,
            row.non_exact_pairs
        );
    }
    Ok(())
}

/// Body of `kappa.json`.
#[derive(Debug, Serialize)]
pub struct KappaReport {
    #[serde(flatten)]
    pub result: KappaResult,
    pub category_labels: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_edges: Option<Vec<f64>>,
    pub provenance: RunConfig,
}

fn parse_bins(spec: &str) -> Result<Option<Binning>> {
    match spec {
        "none" => Ok(None),
        "quartiles" => Ok(Some(Binning::Quartiles)),
        edges => edges
            .split(',')
            .map(|e| {
                e.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad bin spec {spec:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(|e| Some(Binning::Edges(e))),
    }
}

/// Read `item,rater,value` rows. Each (item, rater) may appear once.
fn read_ratings(path: &Path) -> Result<Vec<(String, String, String)>> {
    #[derive(serde::Deserialize)]
    struct Row {
        item: String,
        rater: String,
        value: String,
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut seen = std::collections::HashSet::new();
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::parse(path.display().to_string(), i + 2, e.to_string()))?;
        if !seen.insert((row.item.clone(), row.rater.clone())) {
            return Err(Error::parse(
                path.display().to_string(),
                i + 2,
                format!("rater {:?} rated item {:?} twice", row.rater, row.item),
            ));
        }
        rows.push((row.item, row.rater, row.value));
    }
    Ok(rows)
}

pub fn cmd_kappa(ratings: &Path, bins: &str, out: &Path) -> Result<KappaReport> {
    let binning = parse_bins(bins)?;
    let mut config = RunConfig::new("kappa", out);
    config.bins = Some(bins.to_string());
    config.input("ratings", ratings)?;

    let rows = read_ratings(ratings)?;
    let (labels, edges): (Vec<String>, Option<Vec<f64>>) = match &binning {
        None => (rows.iter().map(|r| r.2.clone()).collect(), None),
        Some(binning) => {
            let values = rows
                .iter()
                .map(|r| {
                    r.2.parse::<f64>()
                        .map_err(|_| Error::InvalidRatings(format!("non-numeric rating {:?}", r.2)))
                })
                .collect::<Result<Vec<_>>>()?;
            let (bins, edges) = bin_values(&values, binning)?;
            // zero-padded so the lexical category order is the numeric one
            (bins.iter().map(|b| format!("bin{b:03}")).collect(), Some(edges))
        }
    };
    let table = RatingsTable::from_labels(rows.iter().map(|r| r.0.clone()).zip(labels))?;
    let result = fleiss_kappa(&table);
    let report = KappaReport {
        result,
        category_labels: table.categories().to_vec(),
        bin_edges: edges,
        provenance: config,
    };
    out_dir(out)?;
    write_json(&out.join("kappa.json"), &report)?;
    println!(
        "kappa={:.6} items={} raters={} categories={}{}",
        report.result.kappa,
        report.result.items,
        report.result.raters,
        report.result.categories,
        if report.result.degenerate { " (single category)" } else { "" }
    );
    Ok(report)
}
