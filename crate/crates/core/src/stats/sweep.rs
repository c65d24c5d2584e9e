//! Threshold sweep auditing the pairs that semantic matching adds on top of
//! a case-insensitive intersection.
//!
//! For every θ of a grid and every system, each document is matched and the
//! matched pairs whose normalized phrases differ are collected. Their union
//! over systems, deduplicated per document, is the audited set; its size per θ
//! and a reviewable dump of every pair are emitted. Error fractions come only
//! from reviewer-supplied labels.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{intersect_matrix, non_exact_pairs, SimilarityMatrix, Theta};
use crate::metrics::align_predictions;
use crate::model::{AspectSet, Corpus, NormalizedPhrase, PredictionRecord};
use crate::similarity::Similarity;

/// Predictions of one system under test.
#[derive(Debug, Clone)]
pub struct SystemPredictions {
    pub system: String,
    pub predictions: Vec<PredictionRecord>,
}

/// Strictly increasing thresholds in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid(Vec<Theta>);

impl Grid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("empty theta grid".into()));
        }
        if values.iter().any(|&v| v <= 0.0 || v > 1.0) {
            return Err(Error::Config("grid values must lie in (0, 1]".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grid values must be strictly increasing".into()));
        }
        Ok(Self(
            values
                .into_iter()
                .map(Theta::new)
                .collect::<Result<_>>()?,
        ))
    }

    /// 0.025, 0.05, ..., 1.0.
    pub fn standard() -> Self {
        Self((1..=40).map(|k| Theta::new(k as f64 / 40.0).unwrap()).collect())
    }

    /// Parse `start:stop:step` (inclusive, decimal) or a comma-separated list.
    ///
    /// Range values are computed as integers over a power of ten, so
    /// `0.025:1:0.025` yields exactly the literals `0.025, ..., 0.95, ...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.contains(':') {
            let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
            let [start, stop, step] = parts[..] else {
                return Err(Error::Config(format!("grid range must be start:stop:step, got {spec:?}")));
            };
            let scale = [start, stop, step]
                .iter()
                .map(|s| s.split_once('.').map_or(0, |(_, frac)| frac.len()))
                .max()
                .unwrap_or(0) as u32;
            let to_int = |s: &str| -> Result<i64> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Config(format!("bad grid number {s:?}")))?;
                Ok((v * 10f64.powi(scale as i32)).round() as i64)
            };
            let (a, b, d) = (to_int(start)?, to_int(stop)?, to_int(step)?);
            if d <= 0 {
                return Err(Error::Config("grid step must be positive".into()));
            }
            let denom = 10f64.powi(scale as i32);
            let mut values = Vec::new();
            let mut k = a;
            while k <= b {
                values.push(k as f64 / denom);
                k += d;
            }
            Self::new(values)
        } else {
            let values = spec
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad grid number {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Self::new(values)
        }
    }

    pub fn values(&self) -> &[Theta] {
        &self.0
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::standard()
    }
}

/// Reviewer verdicts on audited pairs, keyed by normalized (detected, gold).
#[derive(Debug, Clone, Default)]
pub struct ReviewLabels {
    verdicts: HashMap<(NormalizedPhrase, NormalizedPhrase), bool>,
}

#[derive(Deserialize)]
struct LabelRow {
    detected: String,
    gold: String,
    valid: String,
}

impl ReviewLabels {
    pub fn insert(&mut self, detected: &str, gold: &str, valid: bool) -> Result<()> {
        let key = (NormalizedPhrase::new(detected)?, NormalizedPhrase::new(gold)?);
        self.verdicts.insert(key, valid);
        Ok(())
    }

    /// CSV with header `detected,gold,valid`; `valid` is true/false/1/0/yes/no.
    pub fn from_csv_reader<R: Read>(source: &str, reader: R) -> Result<Self> {
        let mut labels = Self::default();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for (i, row) in rdr.deserialize::<LabelRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::parse(source, line, e.to_string()))?;
            let valid = match row.valid.to_lowercase().as_str() {
                "true" | "1" | "yes" | "y" => true,
                "false" | "0" | "no" | "n" => false,
                other => {
                    return Err(Error::parse(source, line, format!("bad verdict {other:?}")));
                }
            };
            labels
                .insert(&row.detected, &row.gold, valid)
                .map_err(|e| Error::parse(source, line, e.to_string()))?;
        }
        Ok(labels)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(&path.display().to_string(), file)
    }

    pub fn verdict(&self, detected: &NormalizedPhrase, gold: &NormalizedPhrase) -> Option<bool> {
        self.verdicts.get(&(detected.clone(), gold.clone())).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: Theta,
    /// Matched pairs summed over systems and documents.
    pub matched_pairs: usize,
    /// Size of the audited set: non-exact matched pairs, deduplicated per
    /// document across systems.
    pub non_exact_pairs: usize,
    /// Case-insensitive intersection size summed over systems and documents.
    pub exact_pairs: usize,
    /// Audited pairs that carry a reviewer verdict.
    pub labeled_pairs: usize,
    /// Share of labeled audited pairs judged invalid.
    pub error_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDumpRow {
    pub theta: Theta,
    pub system: String,
    pub doc_id: String,
    pub detected: String,
    pub gold: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub pairs: Vec<PairDumpRow>,
}

struct Prepared {
    system: usize,
    doc_id: String,
    gold: Vec<NormalizedPhrase>,
    detected: Vec<NormalizedPhrase>,
    matrix: SimilarityMatrix,
}

/// Run the sweep. Similarities are computed once per (system, document).
pub fn theta_sweep(
    corpus: &Corpus,
    systems: &[SystemPredictions],
    grid: &Grid,
    backend: &dyn Similarity,
    labels: Option<&ReviewLabels>,
) -> Result<SweepOutput> {
    if systems.is_empty() {
        return Err(Error::EmptyInput("theta sweep needs at least one system".into()));
    }
    let empty = AspectSet::new();
    let mut jobs = Vec::new();
    let mut exact_pairs = 0usize;
    for (s, system) in systems.iter().enumerate() {
        let by_doc = align_predictions(corpus, &system.predictions)?;
        for doc in corpus.iter() {
            let detected = by_doc.get(doc.id.as_str()).map_or(&empty, |p| &p.detected);
            exact_pairs += doc
                .gold
                .iter()
                .filter(|g| detected.contains(g.normalized()))
                .count();
            jobs.push((s, doc, detected));
        }
    }
    let prepared: Vec<Prepared> = jobs
        .into_par_iter()
        .map(|(system, doc, detected)| {
            let gold = doc.gold.phrases();
            let detected = detected.phrases();
            let matrix = SimilarityMatrix::compute(&gold, &detected, backend)?;
            Ok(Prepared {
                system,
                doc_id: doc.id.clone(),
                gold,
                detected,
                matrix,
            })
        })
        .collect::<Result<_>>()?;

    let per_theta: Vec<(SweepRow, Vec<PairDumpRow>)> = grid
        .values()
        .par_iter()
        .map(|&theta| {
            let mut matched = 0usize;
            let mut audited: BTreeSet<(String, NormalizedPhrase, NormalizedPhrase)> = BTreeSet::new();
            let mut dump = Vec::new();
            for job in &prepared {
                let m = intersect_matrix(&job.doc_id, &job.matrix, theta)?;
                matched += m.len();
                for pair in non_exact_pairs(&m, &job.gold, &job.detected)? {
                    dump.push(PairDumpRow {
                        theta,
                        system: systems[job.system].system.clone(),
                        doc_id: job.doc_id.clone(),
                        detected: pair.detected.to_string(),
                        gold: pair.gold.to_string(),
                        similarity: pair.similarity,
                    });
                    audited.insert((job.doc_id.clone(), pair.detected, pair.gold));
                }
            }
            let (labeled, invalid) = labels.map_or((0, 0), |labels| {
                audited.iter().fold((0, 0), |(l, bad), (_, d, g)| match labels.verdict(d, g) {
                    Some(valid) => (l + 1, bad + usize::from(!valid)),
                    None => (l, bad),
                })
            });
            let row = SweepRow {
                theta,
                matched_pairs: matched,
                non_exact_pairs: audited.len(),
                exact_pairs,
                labeled_pairs: labeled,
                error_fraction: (labeled > 0).then(|| invalid as f64 / labeled as f64),
            };
            Ok((row, dump))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(per_theta.len());
    let mut pairs = Vec::new();
    for (row, dump) in per_theta {
        rows.push(row);
        pairs.extend(dump);
    }
    pairs.sort_by(|a, b| {
        a.theta
            .value()
            .total_cmp(&b.theta.value())
            .then_with(|| a.system.cmp(&b.system))
            .then_with(|| a.doc_id.cmp(&b.doc_id))
            .then_with(|| b.similarity.total_cmp(&a.similarity))
            .then_with(|| a.detected.cmp(&b.detected))
            .then_with(|| a.gold.cmp(&b.gold))
    });
    Ok(SweepOutput { rows, pairs })
}

impl SweepOutput {
    pub fn write_rows_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "theta",
            "matched_pairs",
            "non_exact_pairs",
            "exact_pairs",
            "labeled_pairs",
            "error_fraction",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.theta.to_string(),
                r.matched_pairs.to_string(),
                r.non_exact_pairs.to_string(),
                r.exact_pairs.to_string(),
                r.labeled_pairs.to_string(),
                r.error_fraction.map_or_else(String::new, |f| f.to_string()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Pair dump with columns `theta,system,doc_id,detected,gold,similarity`.
    pub fn write_pairs_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["theta", "system", "doc_id", "detected", "gold", "similarity"])?;
        for p in &self.pairs {
            w.write_record([
                p.theta.to_string(),
                p.system.clone(),
                p.doc_id.clone(),
                p.detected.clone(),
                p.gold.clone(),
                p.similarity.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
