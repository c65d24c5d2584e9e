//! Domain types: polarities, normalized aspect phrases, documents and predictions.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Sentiment label attached to an aspect.
///
/// `Conflicting` only comes from ingesting datasets that carry it (SemEval's
/// `conflict`); scoring folds it into `Neutral` unless [`ConflictPolicy::Strict`]
/// is selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
    Conflicting,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
            Polarity::Conflicting => "conflicting",
        }
    }

    /// The class this label is scored as under `policy`.
    pub fn scoring_class(self, policy: ConflictPolicy) -> Polarity {
        match (self, policy) {
            (Polarity::Conflicting, ConflictPolicy::FoldToNeutral) => Polarity::Neutral,
            (p, _) => p,
        }
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "positive" => Ok(Polarity::Positive),
            "negative" => Ok(Polarity::Negative),
            "neutral" => Ok(Polarity::Neutral),
            "conflict" | "conflicting" => Ok(Polarity::Conflicting),
            _ => Err(Error::UnknownPolarity(s.to_string())),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Polarity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Polarity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the `conflicting` label is treated when scoring sentiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictPolicy {
    /// Score `conflicting` as `neutral`.
    #[default]
    FoldToNeutral,
    /// Keep `conflicting` as a fourth class.
    Strict,
}

impl ConflictPolicy {
    /// Polarity classes scored under this policy, in report order.
    pub fn classes(self) -> &'static [Polarity] {
        match self {
            ConflictPolicy::FoldToNeutral => {
                &[Polarity::Positive, Polarity::Negative, Polarity::Neutral]
            }
            ConflictPolicy::Strict => &[
                Polarity::Positive,
                Polarity::Negative,
                Polarity::Neutral,
                Polarity::Conflicting,
            ],
        }
    }
}

/// An aspect phrase in comparison form: NFC, lowercase, trimmed, with
/// internal whitespace runs collapsed to a single space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NormalizedPhrase(String);

impl NormalizedPhrase {
    pub fn new(raw: &str) -> Result<Self> {
        normalize_phrase(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for NormalizedPhrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedPhrase {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Normalize a raw aspect phrase for comparison.
pub fn normalize_phrase(raw: &str) -> Result<NormalizedPhrase> {
    let composed: String = raw.nfc().collect();
    let lowered: String = composed.to_lowercase().nfc().collect();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    if out.is_empty() {
        return Err(Error::EmptyPhrase);
    }
    Ok(NormalizedPhrase(out))
}

/// One annotated opinion target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AspectPolarityPair {
    aspect: String,
    polarity: Polarity,
    normalized: NormalizedPhrase,
}

impl AspectPolarityPair {
    pub fn new(aspect: impl Into<String>, polarity: Polarity) -> Result<Self> {
        let aspect = aspect.into();
        let normalized = normalize_phrase(&aspect)?;
        Ok(Self {
            aspect,
            polarity,
            normalized,
        })
    }

    /// The aspect as written by the annotator or system.
    pub fn aspect(&self) -> &str {
        &self.aspect
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn normalized(&self) -> &NormalizedPhrase {
        &self.normalized
    }
}

/// Aspect pairs of one document, unique by normalized phrase.
///
/// Insertion order is kept; a repeated phrase with the same polarity is
/// merged into its first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AspectSet {
    pairs: Vec<AspectPolarityPair>,
}

impl AspectSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a set, failing on a phrase repeated with a different polarity.
    pub fn from_pairs<I>(doc_id: &str, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = AspectPolarityPair>,
    {
        let mut set = Self::new();
        for pair in pairs {
            set.insert(doc_id, pair)?;
        }
        Ok(set)
    }

    /// Insert a pair. Returns `Ok(false)` when it merged into an existing entry.
    pub fn insert(&mut self, doc_id: &str, pair: AspectPolarityPair) -> Result<bool> {
        if let Some(existing) = self.get(pair.normalized()) {
            if existing.polarity != pair.polarity {
                return Err(Error::ConflictingDuplicateAspect {
                    doc_id: doc_id.to_string(),
                    aspect: pair.aspect,
                    first: existing.polarity.to_string(),
                    second: pair.polarity.to_string(),
                });
            }
            return Ok(false);
        }
        self.pairs.push(pair);
        Ok(true)
    }

    pub fn get(&self, phrase: &NormalizedPhrase) -> Option<&AspectPolarityPair> {
        self.pairs.iter().find(|p| p.normalized() == phrase)
    }

    pub fn contains(&self, phrase: &NormalizedPhrase) -> bool {
        self.get(phrase).is_some()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AspectPolarityPair> {
        self.pairs.iter()
    }

    pub fn as_slice(&self) -> &[AspectPolarityPair] {
        &self.pairs
    }

    /// Normalized phrases in set order.
    pub fn phrases(&self) -> Vec<NormalizedPhrase> {
        self.pairs.iter().map(|p| p.normalized.clone()).collect()
    }
}

impl<'a> IntoIterator for &'a AspectSet {
    type Item = &'a AspectPolarityPair;
    type IntoIter = std::slice::Iter<'a, AspectPolarityPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

/// A document with its gold aspect set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub id: String,
    pub text: String,
    pub gold: AspectSet,
}

/// The aspects one system detected for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRecord {
    pub doc_id: String,
    pub detected: AspectSet,
}

impl PredictionRecord {
    pub fn empty(doc_id: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            detected: AspectSet::new(),
        }
    }
}

/// Documents in file order with a unique-id index.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<AnnotatedDocument>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(docs: Vec<AnnotatedDocument>) -> Result<Self> {
        let mut index = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if index.insert(doc.id.clone(), i).is_some() {
                return Err(Error::DuplicateDocId(doc.id.clone()));
            }
        }
        Ok(Self { docs, index })
    }

    pub fn get(&self, id: &str) -> Option<&AnnotatedDocument> {
        self.index.get(id).map(|&i| &self.docs[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn documents(&self) -> &[AnnotatedDocument] {
        &self.docs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AnnotatedDocument> {
        self.docs.iter()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Keep only documents that satisfy `keep`.
    pub fn retain(self, mut keep: impl FnMut(&AnnotatedDocument) -> bool) -> Self {
        let docs: Vec<_> = self.docs.into_iter().filter(|d| keep(d)).collect();
        // ids were already unique
        Self::new(docs).expect("subset of a valid corpus")
    }

    pub fn into_documents(self) -> Vec<AnnotatedDocument> {
        self.docs
    }
}
