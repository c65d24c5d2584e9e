//! Phrase similarity measures with scores in `[0, 1]`.
//!
//! Three families are provided:
//!
//! * [`SimilarityBackend::Exact`]: indicator of equal normalized phrases.
//! * [`SimilarityBackend::CharNgram`]: Dice coefficient over character n-grams,
//!   an offline fallback that needs no embedding service.
//! * [`SimilarityBackend::Embedding`]: scaled cosine similarity `(1 + cos) / 2`
//!   between sentence embeddings, resolved ahead of time through
//!   [`embed_batch`] and an [`EmbeddingCache`].
//!
//! [`OracleTable`] serves fixed, hand-written scores so that whole pipelines
//! run hermetically in tests.

mod cache;
mod provider;

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NormalizedPhrase;

pub use cache::{CacheRecord, EmbeddingCache};
pub use provider::{
    embed_batch, CacheOnlyProvider, EmbedOptions, EmbeddingProvider, HttpEmbeddingProvider,
};

/// A symmetric similarity measure over normalized phrases.
///
/// Implementations must be deterministic and return values in `[0, 1]`.
pub trait Similarity: Send + Sync {
    /// Stable identifier written into reports.
    fn id(&self) -> String;

    fn score(&self, a: &NormalizedPhrase, b: &NormalizedPhrase) -> Result<f64>;
}

/// Similarity of `a` and `b` under `backend`.
pub fn similarity(
    a: &NormalizedPhrase,
    b: &NormalizedPhrase,
    backend: &dyn Similarity,
) -> Result<f64> {
    backend.score(a, b)
}

/// A dense embedding vector. Not required to be unit-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidShape("embedding vector has dimension 0".into()));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `(1 + cos(u, v)) / 2`, clamped to `[0, 1]`.
pub fn scaled_cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in u.values().iter().zip(v.values()) {
        dot += x * y;
        nu += x * x;
        nv += y * y;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cos = dot / (nu * nv).sqrt();
    Ok(((1.0 + cos) / 2.0).clamp(0.0, 1.0))
}

/// Dice coefficient over the sets of character n-grams of two phrases.
///
/// Phrases shorter than `n` characters contribute themselves as a single gram.
pub fn char_ngram_dice(a: &str, b: &str, n: usize) -> f64 {
    if a == b {
        return 1.0;
    }
    let ga = char_ngrams(a, n);
    let gb = char_ngrams(b, n);
    let shared = ga.intersection(&gb).count();
    2.0 * shared as f64 / (ga.len() + gb.len()) as f64
}

fn char_ngrams(s: &str, n: usize) -> BTreeSet<String> {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() <= n {
        return BTreeSet::from([s.to_string()]);
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Scaled cosine similarity over precomputed embeddings.
#[derive(Debug, Clone)]
pub struct EmbeddingSimilarity {
    provider: String,
    vectors: HashMap<NormalizedPhrase, EmbeddingVector>,
}

impl EmbeddingSimilarity {
    pub fn new(provider: impl Into<String>) -> Self {
        Self {
            provider: provider.into(),
            vectors: HashMap::new(),
        }
    }

    /// Resolve `phrases` through `provider` (cache first) and keep their vectors.
    pub fn resolve(
        phrases: &[NormalizedPhrase],
        provider: &dyn EmbeddingProvider,
        cache: &mut EmbeddingCache,
        options: &EmbedOptions,
    ) -> Result<Self> {
        let mut table = Self::new(provider.id());
        if phrases.is_empty() {
            return Ok(table);
        }
        let vectors = embed_batch(phrases, provider, cache, options)?;
        for (phrase, vector) in phrases.iter().zip(vectors) {
            table.insert(phrase.clone(), vector);
        }
        Ok(table)
    }

    pub fn insert(&mut self, phrase: NormalizedPhrase, vector: EmbeddingVector) {
        self.vectors.insert(phrase, vector);
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    fn vector(&self, phrase: &NormalizedPhrase) -> Result<&EmbeddingVector> {
        self.vectors
            .get(phrase)
            .ok_or_else(|| Error::MissingEmbedding(phrase.to_string()))
    }
}

/// Hand-specified similarity scores keyed by unordered phrase pairs.
///
/// Identical phrases score 1 unless listed; unlisted pairs score 0.
#[derive(Debug, Clone, Default)]
pub struct OracleTable {
    source: String,
    scores: HashMap<(NormalizedPhrase, NormalizedPhrase), f64>,
}

#[derive(Debug, Deserialize)]
struct OracleRow {
    phrase_a: String,
    phrase_b: String,
    sigma: f64,
}

impl OracleTable {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            scores: HashMap::new(),
        }
    }

    pub fn insert(&mut self, a: &str, b: &str, sigma: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(Error::Config(format!(
                "oracle similarity for ({a:?}, {b:?}) must lie in [0, 1], got {sigma}"
            )));
        }
        let key = Self::key(normalize(a)?, normalize(b)?);
        if let Some(prev) = self.scores.insert(key, sigma) {
            if prev != sigma {
                return Err(Error::Config(format!(
                    "oracle lists ({a:?}, {b:?}) twice with different scores"
                )));
            }
        }
        Ok(())
    }

    /// Read a CSV with header `phrase_a,phrase_b,sigma`.
    pub fn from_csv_reader<R: Read>(source: &str, reader: R) -> Result<Self> {
        let mut table = Self::new(source);
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for (i, row) in rdr.deserialize::<OracleRow>().enumerate() {
            let row = row.map_err(|e| Error::parse(source, i + 2, e.to_string()))?;
            table
                .insert(&row.phrase_a, &row.phrase_b, row.sigma)
                .map_err(|e| Error::parse(source, i + 2, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(&path.display().to_string(), file)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn key(a: NormalizedPhrase, b: NormalizedPhrase) -> (NormalizedPhrase, NormalizedPhrase) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn lookup(&self, a: &NormalizedPhrase, b: &NormalizedPhrase) -> f64 {
        let key = Self::key(a.clone(), b.clone());
        match self.scores.get(&key) {
            Some(&s) => s,
            None if a == b => 1.0,
            None => 0.0,
        }
    }
}

fn normalize(s: &str) -> Result<NormalizedPhrase> {
    NormalizedPhrase::new(s)
}

/// The similarity measures available to the scorer.
#[derive(Debug, Clone)]
pub enum SimilarityBackend {
    Exact,
    CharNgram { n: usize },
    Embedding(EmbeddingSimilarity),
    Oracle(OracleTable),
}

impl SimilarityBackend {
    pub fn char_trigram() -> Self {
        SimilarityBackend::CharNgram { n: 3 }
    }
}

impl Similarity for SimilarityBackend {
    fn id(&self) -> String {
        match self {
            SimilarityBackend::Exact => "exact".to_string(),
            SimilarityBackend::CharNgram { n } => format!("char-ngram:{n}"),
            SimilarityBackend::Embedding(e) => format!("embedding:{}", e.provider),
            SimilarityBackend::Oracle(t) => format!("oracle:{}", t.source),
        }
    }

    fn score(&self, a: &NormalizedPhrase, b: &NormalizedPhrase) -> Result<f64> {
        match self {
            SimilarityBackend::Exact => Ok(if a == b { 1.0 } else { 0.0 }),
            SimilarityBackend::CharNgram { n } => Ok(char_ngram_dice(a.as_str(), b.as_str(), *n)),
            SimilarityBackend::Embedding(table) => {
                let u = table.vector(a)?;
                let v = table.vector(b)?;
                if a == b {
                    return Ok(1.0);
                }
                scaled_cosine(u, v)
            }
            SimilarityBackend::Oracle(table) => Ok(table.lookup(a, b)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> NormalizedPhrase {
        NormalizedPhrase::new(s).unwrap()
    }

    fn v(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn exact_backend_is_an_indicator() {
        let b = SimilarityBackend::Exact;
        assert_eq!(b.score(&p("service"), &p("service")).unwrap(), 1.0);
        assert_eq!(b.score(&p("service"), &p("dishes")).unwrap(), 0.0);
        assert_eq!(b.score(&p("Service"), &p(" service")).unwrap(), 1.0);
    }

    #[test]
    fn scaled_cosine_fixed_points() {
        assert_eq!(scaled_cosine(&v(&[0.3, -2.0]), &v(&[0.3, -2.0])).unwrap(), 1.0);
        assert!(scaled_cosine(&v(&[1.0, 2.0]), &v(&[-1.0, -2.0])).unwrap() < 1e-15);
        assert_eq!(scaled_cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.5);
    }

    #[test]
    fn scaled_cosine_errors() {
        assert!(matches!(
            scaled_cosine(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(Error::DimensionMismatch(1, 2))
        ));
        assert!(matches!(
            scaled_cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::ZeroVector)
        ));
        assert!(EmbeddingVector::new(vec![]).is_err());
    }

    #[test]
    fn char_ngram_values() {
        assert_eq!(char_ngram_dice("service", "service", 3), 1.0);
        // "night" -> nig igh ght, "nacht" -> nac ach cht: nothing shared
        assert_eq!(char_ngram_dice("night", "nacht", 3), 0.0);
        // "abcd" -> abc bcd, "abce" -> abc bce
        assert_eq!(char_ngram_dice("abcd", "abce", 3), 0.5);
        assert_eq!(char_ngram_dice("ac", "ab", 3), 0.0);
    }

    #[test]
    fn embedding_backend_requires_vectors() {
        let mut table = EmbeddingSimilarity::new("m");
        table.insert(p("ac"), v(&[1.0, 0.1]));
        table.insert(p("air conditioner"), v(&[0.9, 0.2]));
        let backend = SimilarityBackend::Embedding(table);
        assert_eq!(backend.score(&p("ac"), &p("ac")).unwrap(), 1.0);
        let s = backend.score(&p("ac"), &p("air conditioner")).unwrap();
        assert!(s > 0.95 && s < 1.0);
        assert!(matches!(
            backend.score(&p("ac"), &p("look")),
            Err(Error::MissingEmbedding(_))
        ));
        assert_eq!(backend.id(), "embedding:m");
    }

    #[test]
    fn oracle_table_lookup() {
        let csv = "phrase_a,phrase_b,sigma\nAC,air conditioner,0.97\nlook, appearance ,0.96\n";
        let table = OracleTable::from_csv_reader("fig", csv.as_bytes()).unwrap();
        let b = SimilarityBackend::Oracle(table);
        assert_eq!(b.score(&p("air conditioner"), &p("ac")).unwrap(), 0.97);
        assert_eq!(b.score(&p("look"), &p("Appearance")).unwrap(), 0.96);
        assert_eq!(b.score(&p("service"), &p("service")).unwrap(), 1.0);
        assert_eq!(b.score(&p("service"), &p("dishes")).unwrap(), 0.0);
    }

    #[test]
    fn oracle_rejects_out_of_range_and_conflicts() {
        let bad = "phrase_a,phrase_b,sigma\na,b,1.5\n";
        assert!(OracleTable::from_csv_reader("x", bad.as_bytes()).is_err());
        let dup = "phrase_a,phrase_b,sigma\na,b,0.5\nB,a,0.6\n";
        assert!(OracleTable::from_csv_reader("x", dup.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn scaled_cosine_is_scale_invariant(
            u in proptest::collection::vec(-10.0f64..10.0, 4),
            w in proptest::collection::vec(-10.0f64..10.0, 4),
            c in 0.01f64..100.0,
        ) {
            let u = v(&u);
            let w = v(&w);
            prop_assume!(u.values().iter().any(|x| x.abs() > 1e-3));
            prop_assume!(w.values().iter().any(|x| x.abs() > 1e-3));
            let scaled = v(&u.values().iter().map(|x| x * c).collect::<Vec<_>>());
            let a = scaled_cosine(&u, &w).unwrap();
            let b = scaled_cosine(&scaled, &w).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn backends_are_symmetric_and_bounded(a in "[a-e ]{1,8}", b in "[a-e ]{1,8}") {
            let (Ok(a), Ok(b)) = (NormalizedPhrase::new(&a), NormalizedPhrase::new(&b)) else {
                return Ok(());
            };
            for backend in [SimilarityBackend::Exact, SimilarityBackend::char_trigram()] {
                let ab = backend.score(&a, &b).unwrap();
                let ba = backend.score(&b, &a).unwrap();
                prop_assert_eq!(ab, ba);
                prop_assert!((0.0..=1.0).contains(&ab));
            }
            let exact = SimilarityBackend::Exact.score(&a, &b).unwrap();
            prop_assert_eq!(exact, if a == b { 1.0 } else { 0.0 });
        }
    }
}
