//! Extraction and sentiment metrics.
//!
//! Per document, generalized precision is `|matches| / |detected|` and
//! generalized recall is `|matches| / |gold|`, with matches from
//! [`crate::matching::intersect`]. Corpus figures are macro averages: the
//! arithmetic mean of per-document values.
//!
//! Degenerate documents: no detections with gold present gives `p = 0`; no
//! gold with detections present gives `r = 0`; both empty gives `p = r = 1`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matching::{intersect_matrix, MatchSet, SimilarityMatrix, Theta};
use crate::model::{AspectSet, ConflictPolicy, Corpus, Polarity, PredictionRecord};
use crate::similarity::Similarity;

/// Harmonic mean of `p` and `r`, 0 when both are 0.
pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Extraction scores of one document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocScores {
    pub doc_id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold_count: usize,
    pub detected_count: usize,
}

impl DocScores {
    pub fn from_counts(doc_id: &str, matched: usize, gold_count: usize, detected_count: usize) -> Self {
        debug_assert!(matched <= gold_count.min(detected_count));
        let (precision, recall) = match (gold_count, detected_count) {
            (0, 0) => (1.0, 1.0),
            (g, d) => (ratio(matched, d), ratio(matched, g)),
        };
        Self {
            doc_id: doc_id.to_string(),
            precision,
            recall,
            f1: f1_score(precision, recall),
            matched,
            gold_count,
            detected_count,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Generalized precision, recall and F1 of one match set.
pub fn extraction_scores(matches: &MatchSet) -> DocScores {
    DocScores::from_counts(
        &matches.doc_id,
        matches.len(),
        matches.gold_count,
        matches.detected_count,
    )
}

/// Scores from the plain case-insensitive intersection of the two sets.
pub fn exact_match_scores(doc_id: &str, gold: &AspectSet, detected: &AspectSet) -> DocScores {
    let shared = gold
        .iter()
        .filter(|g| detected.contains(g.normalized()))
        .count();
    DocScores::from_counts(doc_id, shared, gold.len(), detected.len())
}

/// Macro-averaged extraction scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroScores {
    pub precision: f64,
    pub recall: f64,
    /// Mean of per-document F1.
    pub f1: f64,
    /// Harmonic mean of the macro precision and recall, for comparison.
    pub f1_of_means: f64,
    pub documents: usize,
}

pub fn macro_average(docs: &[DocScores]) -> MacroScores {
    let n = docs.len();
    let mean = |f: fn(&DocScores) -> f64| {
        if n == 0 {
            0.0
        } else {
            docs.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let precision = mean(|d| d.precision);
    let recall = mean(|d| d.recall);
    MacroScores {
        precision,
        recall,
        f1: mean(|d| d.f1),
        f1_of_means: f1_score(precision, recall),
        documents: n,
    }
}

/// Confusion cells for one polarity class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ClassCounts {
    pub fn support(&self) -> usize {
        self.tp + self.fp + self.fn_
    }

    /// (precision, recall, f1); empty denominators score 0.
    pub fn prf(&self) -> (f64, f64, f64) {
        let p = ratio(self.tp, self.tp + self.fp);
        let r = ratio(self.tp, self.tp + self.fn_);
        (p, r, f1_score(p, r))
    }

    fn add(&mut self, other: &ClassCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Sentiment classification cells of one document.
///
/// Only aspects matched during extraction can be true positives: an unmatched
/// gold aspect is a false negative of its class, an unmatched detection a
/// false positive of its predicted class, and a matched pair with differing
/// polarities counts as both.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocAsc {
    pub doc_id: String,
    pub classes: BTreeMap<Polarity, ClassCounts>,
    pub matched: usize,
    pub correct: usize,
    pub mismatched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn asc_counts(
    matches: &MatchSet,
    gold: &AspectSet,
    detected: &AspectSet,
    policy: ConflictPolicy,
) -> DocAsc {
    let mut classes: BTreeMap<Polarity, ClassCounts> = policy
        .classes()
        .iter()
        .map(|&c| (c, ClassCounts::default()))
        .collect();
    let gold_class = |i: usize| gold.as_slice()[i].polarity().scoring_class(policy);
    let pred_class = |j: usize| detected.as_slice()[j].polarity().scoring_class(policy);

    let mut gold_matched = vec![false; gold.len()];
    let mut det_matched = vec![false; detected.len()];
    let (mut correct, mut mismatched) = (0, 0);
    for pair in &matches.pairs {
        gold_matched[pair.gold] = true;
        det_matched[pair.detected] = true;
        let (g, p) = (gold_class(pair.gold), pred_class(pair.detected));
        if g == p {
            classes.entry(g).or_default().tp += 1;
            correct += 1;
        } else {
            classes.entry(g).or_default().fn_ += 1;
            classes.entry(p).or_default().fp += 1;
            mismatched += 1;
        }
    }
    for (i, _) in gold_matched.iter().enumerate().filter(|(_, m)| !**m) {
        classes.entry(gold_class(i)).or_default().fn_ += 1;
    }
    for (j, _) in det_matched.iter().enumerate().filter(|(_, m)| !**m) {
        classes.entry(pred_class(j)).or_default().fp += 1;
    }

    let present: Vec<(f64, f64, f64)> = classes
        .values()
        .filter(|c| c.support() > 0)
        .map(ClassCounts::prf)
        .collect();
    let (precision, recall, f1) = if present.is_empty() {
        (1.0, 1.0, 1.0)
    } else {
        let n = present.len() as f64;
        (
            present.iter().map(|x| x.0).sum::<f64>() / n,
            present.iter().map(|x| x.1).sum::<f64>() / n,
            present.iter().map(|x| x.2).sum::<f64>() / n,
        )
    };

    DocAsc {
        doc_id: matches.doc_id.clone(),
        classes,
        matched: matches.len(),
        correct,
        mismatched,
        precision,
        recall,
        f1,
    }
}

/// Corpus-level scores for one polarity class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscClassReport {
    pub polarity: Polarity,
    /// Documents in which the class occurs on either side.
    pub documents: usize,
    /// Means of per-document values over those documents.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Confusion cells summed over the corpus.
    pub counts: ClassCounts,
    pub pooled_precision: f64,
    pub pooled_recall: f64,
    pub pooled_f1: f64,
}

/// Aspect sentiment classification block of an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscReport {
    pub classes: Vec<AscClassReport>,
    /// Mean over documents of the per-document class-averaged scores.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `confusion[gold][predicted]` over matched pairs.
    pub confusion: BTreeMap<Polarity, BTreeMap<Polarity, usize>>,
    pub matched_pairs: usize,
    pub correct_polarity: usize,
}

pub fn asc_report(
    docs: &[DocAsc],
    confusion: BTreeMap<Polarity, BTreeMap<Polarity, usize>>,
    policy: ConflictPolicy,
) -> AscReport {
    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let classes = policy
        .classes()
        .iter()
        .map(|&class| {
            let mut counts = ClassCounts::default();
            let (mut ps, mut rs, mut fs) = (Vec::new(), Vec::new(), Vec::new());
            for doc in docs {
                let c = doc.classes.get(&class).copied().unwrap_or_default();
                counts.add(&c);
                if c.support() > 0 {
                    let (p, r, f) = c.prf();
                    ps.push(p);
                    rs.push(r);
                    fs.push(f);
                }
            }
            let (pp, pr, pf) = counts.prf();
            AscClassReport {
                polarity: class,
                documents: ps.len(),
                precision: mean(&ps),
                recall: mean(&rs),
                f1: mean(&fs),
                counts,
                pooled_precision: pp,
                pooled_recall: pr,
                pooled_f1: pf,
            }
        })
        .collect();
    let per_doc = |f: fn(&DocAsc) -> f64| mean(&docs.iter().map(f).collect::<Vec<_>>());
    AscReport {
        classes,
        precision: per_doc(|d| d.precision),
        recall: per_doc(|d| d.recall),
        f1: per_doc(|d| d.f1),
        confusion,
        matched_pairs: docs.iter().map(|d| d.matched).sum(),
        correct_polarity: docs.iter().map(|d| d.correct).sum(),
    }
}

/// ASC block for a list of documents, given their match sets.
pub fn asc_scores(
    matches: &[MatchSet],
    gold: &[&AspectSet],
    predictions: &[&AspectSet],
    policy: ConflictPolicy,
) -> AscReport {
    let docs: Vec<DocAsc> = matches
        .iter()
        .zip(gold.iter().zip(predictions))
        .map(|(m, (g, d))| asc_counts(m, g, d, policy))
        .collect();
    let mut confusion = BTreeMap::new();
    for (m, (g, d)) in matches.iter().zip(gold.iter().zip(predictions)) {
        accumulate_confusion(&mut confusion, m, g, d, policy);
    }
    asc_report(&docs, confusion, policy)
}

fn accumulate_confusion(
    confusion: &mut BTreeMap<Polarity, BTreeMap<Polarity, usize>>,
    matches: &MatchSet,
    gold: &AspectSet,
    detected: &AspectSet,
    policy: ConflictPolicy,
) {
    for pair in &matches.pairs {
        let g = gold.as_slice()[pair.gold].polarity().scoring_class(policy);
        let p = detected.as_slice()[pair.detected].polarity().scoring_class(policy);
        *confusion.entry(g).or_default().entry(p).or_default() += 1;
    }
}

/// A matched pair as shown in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportedMatch {
    pub gold: String,
    pub detected: String,
    pub similarity: f64,
}

/// Everything computed for one document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentReport {
    pub doc_id: String,
    pub missing_prediction: bool,
    pub generalized: DocScores,
    pub exact: DocScores,
    pub asc: DocAsc,
    pub matches: Vec<ReportedMatch>,
}

/// Options for [`macro_evaluate`].
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct EvalOptions {
    pub conflict_policy: ConflictPolicy,
}

/// Result of evaluating one system on a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub theta: Theta,
    pub backend: String,
    pub conflict_policy: ConflictPolicy,
    pub generalized: MacroScores,
    pub exact: MacroScores,
    pub asc: AscReport,
    pub missing_predictions: Vec<String>,
    pub warnings: Vec<String>,
    pub documents: Vec<DocumentReport>,
}

/// Index predictions by document, rejecting unknown and repeated ids.
pub fn align_predictions<'a>(
    corpus: &Corpus,
    predictions: &'a [PredictionRecord],
) -> Result<HashMap<&'a str, &'a PredictionRecord>> {
    let mut by_doc = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if corpus.get(&p.doc_id).is_none() {
            return Err(Error::UnknownDocId(p.doc_id.clone()));
        }
        if by_doc.insert(p.doc_id.as_str(), p).is_some() {
            return Err(Error::DuplicateDocId(p.doc_id.clone()));
        }
    }
    Ok(by_doc)
}

/// Evaluate `predictions` against `corpus`.
///
/// Documents without a prediction are scored with an empty detected set and
/// listed in `missing_predictions`. Documents are scored in parallel on the
/// current rayon pool; the result does not depend on the pool size.
pub fn macro_evaluate(
    corpus: &Corpus,
    predictions: &[PredictionRecord],
    theta: Theta,
    backend: &dyn Similarity,
    options: &EvalOptions,
) -> Result<EvaluationReport> {
    let by_doc = align_predictions(corpus, predictions)?;
    let empty = AspectSet::new();
    let policy = options.conflict_policy;

    let documents: Vec<(DocumentReport, MatchSet)> = corpus
        .documents()
        .par_iter()
        .map(|doc| {
            let prediction = by_doc.get(doc.id.as_str());
            let detected = prediction.map_or(&empty, |p| &p.detected);
            let gold_phrases = doc.gold.phrases();
            let det_phrases = detected.phrases();
            let matrix = SimilarityMatrix::compute(&gold_phrases, &det_phrases, backend)?;
            let matches = intersect_matrix(&doc.id, &matrix, theta)?;
            let report = DocumentReport {
                doc_id: doc.id.clone(),
                missing_prediction: prediction.is_none(),
                generalized: extraction_scores(&matches),
                exact: exact_match_scores(&doc.id, &doc.gold, detected),
                asc: asc_counts(&matches, &doc.gold, detected, policy),
                matches: matches
                    .pairs
                    .iter()
                    .map(|p| ReportedMatch {
                        gold: doc.gold.as_slice()[p.gold].aspect().to_string(),
                        detected: detected.as_slice()[p.detected].aspect().to_string(),
                        similarity: p.similarity,
                    })
                    .collect(),
            };
            Ok((report, matches))
        })
        .collect::<Result<_>>()?;

    let mut confusion = BTreeMap::new();
    for (doc, (_, matches)) in corpus.iter().zip(&documents) {
        let detected = by_doc.get(doc.id.as_str()).map_or(&empty, |p| &p.detected);
        accumulate_confusion(&mut confusion, matches, &doc.gold, detected, policy);
    }
    let documents: Vec<DocumentReport> = documents.into_iter().map(|(r, _)| r).collect();

    let generalized: Vec<DocScores> = documents.iter().map(|d| d.generalized.clone()).collect();
    let exact: Vec<DocScores> = documents.iter().map(|d| d.exact.clone()).collect();
    let asc_docs: Vec<DocAsc> = documents.iter().map(|d| d.asc.clone()).collect();
    let missing: Vec<String> = documents
        .iter()
        .filter(|d| d.missing_prediction)
        .map(|d| d.doc_id.clone())
        .collect();
    let mut warnings = Vec::new();
    if !missing.is_empty() {
        warnings.push(format!(
            "{} document(s) have no prediction and were scored with an empty detected set",
            missing.len()
        ));
    }

    Ok(EvaluationReport {
        theta,
        backend: backend.id(),
        conflict_policy: policy,
        generalized: macro_average(&generalized),
        exact: macro_average(&exact),
        asc: asc_report(&asc_docs, confusion, policy),
        missing_predictions: missing,
        warnings,
        documents,
    })
}

impl EvaluationReport {
    /// Per-document F1 (generalized) in corpus order.
    pub fn f1_vector(&self) -> Vec<f64> {
        self.documents.iter().map(|d| d.generalized.f1).collect()
    }

    /// Write one CSV row per document.
    pub fn write_documents_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "doc_id",
            "gold_count",
            "detected_count",
            "matched",
            "precision",
            "recall",
            "f1",
            "exact_matched",
            "exact_precision",
            "exact_recall",
            "exact_f1",
            "asc_precision",
            "asc_recall",
            "asc_f1",
            "missing_prediction",
        ])?;
        for d in &self.documents {
            let g = &d.generalized;
            let e = &d.exact;
            w.write_record([
                d.doc_id.clone(),
                g.gold_count.to_string(),
                g.detected_count.to_string(),
                g.matched.to_string(),
                g.precision.to_string(),
                g.recall.to_string(),
                g.f1.to_string(),
                e.matched.to_string(),
                e.precision.to_string(),
                e.recall.to_string(),
                e.f1.to_string(),
                d.asc.precision.to_string(),
                d.asc.recall.to_string(),
                d.asc.f1.to_string(),
                d.missing_prediction.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
