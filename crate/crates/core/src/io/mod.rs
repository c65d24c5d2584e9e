//! Corpus and prediction files.
//!
//! Every dataset is converted into one canonical JSON Lines layout:
//!
//! ```text
//! {"id":"17","text":"Great food.","aspects":[{"aspect":"food","polarity":"positive"}]}
//! ```
//!
//! Prediction files use the same records without `text`. A prediction line
//! may instead carry the raw model response under `output` or `response`,
//! which is read with [`parse_llm_annotation`].

mod formats;
mod llm;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use formats::{read_semeval_xml, read_sport_json, read_twitter};
pub use llm::{parse_llm_annotation, parse_numbered_responses, AnnotationParse};

use crate::error::{Error, Result};
use crate::model::{
    normalize_phrase, AnnotatedDocument, AspectPolarityPair, AspectSet, Corpus, Polarity,
    PredictionRecord,
};
use formats::FlexibleId;

/// Source layouts understood by [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    #[default]
    Canonical,
    SemevalXml,
    TwitterTriple,
    SportJson,
}

impl CorpusFormat {
    pub const ALL: [CorpusFormat; 4] = [
        CorpusFormat::Canonical,
        CorpusFormat::SemevalXml,
        CorpusFormat::TwitterTriple,
        CorpusFormat::SportJson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusFormat::Canonical => "canonical",
            CorpusFormat::SemevalXml => "semeval-xml",
            CorpusFormat::TwitterTriple => "twitter-triple",
            CorpusFormat::SportJson => "sport-json",
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown corpus format {s:?}")))
    }
}

#[derive(Serialize, Deserialize)]
struct AspectRecord {
    aspect: String,
    polarity: String,
}

#[derive(Serialize)]
struct CorpusRecordOut<'a> {
    id: &'a str,
    text: &'a str,
    aspects: Vec<AspectRecordRef<'a>>,
}

#[derive(Serialize)]
struct AspectRecordRef<'a> {
    aspect: &'a str,
    polarity: &'a str,
}

#[derive(Deserialize)]
struct CorpusRecordIn {
    id: FlexibleId,
    #[serde(default)]
    text: String,
    #[serde(default)]
    aspects: Vec<AspectRecord>,
}

#[derive(Deserialize)]
struct PredictionRecordIn {
    id: FlexibleId,
    aspects: Option<Vec<AspectRecord>>,
    output: Option<String>,
    response: Option<String>,
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn aspect_set(source: &str, line: usize, doc_id: &str, aspects: Vec<AspectRecord>) -> Result<AspectSet> {
    let mut set = AspectSet::new();
    for a in aspects {
        let polarity: Polarity = a
            .polarity
            .parse()
            .map_err(|e: Error| Error::parse(source, line, e.to_string()))?;
        let pair = AspectPolarityPair::new(a.aspect, polarity)
            .map_err(|e| Error::parse(source, line, format!("document {doc_id:?}: {e}")))?;
        set.insert(doc_id, pair)?;
    }
    Ok(set)
}

/// Non-blank lines with their 1-based line numbers.
fn jsonl_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parse canonical corpus JSONL held in memory.
pub fn read_canonical(source: &str, content: &str) -> Result<Vec<AnnotatedDocument>> {
    jsonl_lines(content)
        .map(|(line, text)| {
            let record: CorpusRecordIn = serde_json::from_str(text)
                .map_err(|e| Error::parse(source, line, e.to_string()))?;
            let id = record.id.0;
            let gold = aspect_set(source, line, &id, record.aspects)?;
            Ok(AnnotatedDocument {
                id,
                text: record.text,
                gold,
            })
        })
        .collect()
}

/// Parse `content` in `format`; `source` names it in error messages.
pub fn parse_corpus(source: &str, content: &str, format: CorpusFormat) -> Result<Corpus> {
    let docs = match format {
        CorpusFormat::Canonical => read_canonical(source, content)?,
        CorpusFormat::SemevalXml => read_semeval_xml(source, content)?,
        CorpusFormat::TwitterTriple => read_twitter(source, content)?,
        CorpusFormat::SportJson => read_sport_json(source, content)?,
    };
    Corpus::new(docs)
}

/// Load a corpus file in the given layout.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    parse_corpus(&path.display().to_string(), &read_file(path)?, format)
}

/// Predictions of one system plus notes about raw responses that did not
/// parse cleanly.
#[derive(Debug, Clone, Default)]
pub struct PredictionFile {
    pub records: Vec<PredictionRecord>,
    /// `(doc_id, message)` for every skipped fragment of a raw response.
    pub diagnostics: Vec<(String, String)>,
}

/// Parse prediction JSONL held in memory.
pub fn parse_predictions(source: &str, content: &str) -> Result<PredictionFile> {
    let mut out = PredictionFile::default();
    for (line, text) in jsonl_lines(content) {
        let record: PredictionRecordIn =
            serde_json::from_str(text).map_err(|e| Error::parse(source, line, e.to_string()))?;
        let doc_id = record.id.0;
        let detected = match (record.aspects, record.output.or(record.response)) {
            (Some(aspects), _) => aspect_set(source, line, &doc_id, aspects)?,
            (None, Some(raw)) => {
                let parsed = parse_llm_annotation(&raw);
                out.diagnostics
                    .extend(parsed.diagnostics.into_iter().map(|d| (doc_id.clone(), d)));
                parsed.pairs
            }
            (None, None) => {
                return Err(Error::parse(
                    source,
                    line,
                    "record needs \"aspects\", \"output\" or \"response\"",
                ))
            }
        };
        out.records.push(PredictionRecord { doc_id, detected });
    }
    Ok(out)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionFile> {
    let path = path.as_ref();
    parse_predictions(&path.display().to_string(), &read_file(path)?)
}

/// Serialize documents as canonical JSONL. Output is LF-terminated and
/// depends only on the documents, so it is stable across runs.
pub fn write_corpus<W: Write>(mut writer: W, docs: &[AnnotatedDocument]) -> Result<()> {
    for doc in docs {
        let record = CorpusRecordOut {
            id: &doc.id,
            text: &doc.text,
            aspects: doc
                .gold
                .iter()
                .map(|p| AspectRecordRef {
                    aspect: p.aspect(),
                    polarity: p.polarity().as_str(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Serialize predictions as canonical JSONL.
pub fn write_predictions<W: Write>(mut writer: W, records: &[PredictionRecord]) -> Result<()> {
    #[derive(Serialize)]
    struct Out<'a> {
        id: &'a str,
        aspects: Vec<AspectRecordRef<'a>>,
    }
    for r in records {
        let record = Out {
            id: &r.doc_id,
            aspects: r
                .detected
                .iter()
                .map(|p| AspectRecordRef {
                    aspect: p.aspect(),
                    polarity: p.polarity().as_str(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Convert `source` in `format` into canonical JSONL at `dest`.
pub fn convert(source: impl AsRef<Path>, format: CorpusFormat, dest: impl AsRef<Path>) -> Result<CorpusSummary> {
    let corpus = load_corpus(source, format)?;
    let dest = dest.as_ref();
    let mut buf = Vec::new();
    write_corpus(&mut buf, corpus.documents())?;
    fs::write(dest, buf).map_err(|e| Error::io(dest, e))?;
    Ok(CorpusSummary::of(&corpus))
}

/// Counts used to check a converted dataset against its published statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub aspects: usize,
    /// Distinct normalized phrases across the corpus.
    pub unique_aspects: usize,
    pub polarities: BTreeMap<Polarity, usize>,
    /// Aspects whose normalized phrase does not occur in the normalized text.
    pub implicit_aspects: usize,
    pub implicit_rate: f64,
    pub empty_documents: usize,
    pub aspects_per_document: f64,
}

impl CorpusSummary {
    pub fn of(corpus: &Corpus) -> Self {
        let mut polarities: BTreeMap<Polarity, usize> = BTreeMap::new();
        let mut unique = BTreeSet::new();
        let mut aspects = 0;
        let mut implicit = 0;
        let mut empty = 0;
        for doc in corpus.iter() {
            let text = normalize_phrase(&doc.text)
                .map(|p| p.into_string())
                .unwrap_or_default();
            if doc.gold.is_empty() {
                empty += 1;
            }
            for pair in &doc.gold {
                aspects += 1;
                *polarities.entry(pair.polarity()).or_default() += 1;
                unique.insert(pair.normalized().as_str());
                if !text.contains(pair.normalized().as_str()) {
                    implicit += 1;
                }
            }
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Self {
            documents: corpus.len(),
            aspects,
            unique_aspects: unique.len(),
            polarities,
            implicit_aspects: implicit,
            implicit_rate: ratio(implicit, aspects),
            empty_documents: empty,
            aspects_per_document: ratio(aspects, corpus.len()),
        }
    }
}

impl fmt::Display for CorpusSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents            {}", self.documents)?;
        writeln!(f, "aspects              {}", self.aspects)?;
        writeln!(f, "unique aspects       {}", self.unique_aspects)?;
        writeln!(f, "empty documents      {}", self.empty_documents)?;
        writeln!(f, "aspects per document {:.3}", self.aspects_per_document)?;
        for p in [Polarity::Positive, Polarity::Negative, Polarity::Neutral, Polarity::Conflicting] {
            writeln!(f, "{:<20} {}", p.as_str(), self.polarities.get(&p).copied().unwrap_or(0))?;
        }
        write!(
            f,
            "implicit aspects     {} ({:.1}%)",
            self.implicit_aspects,
            100.0 * self.implicit_rate
        )
    }
}
