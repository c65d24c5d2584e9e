use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::NormalizedPhrase;
use crate::similarity::{
    CacheOnlyProvider, EmbedOptions, EmbeddingCache, EmbeddingProvider, EmbeddingSimilarity,
    HttpEmbeddingProvider, OracleTable, SimilarityBackend,
};

/// `--backend` value: `exact`, `char-ngram[:N]`, `embedding` or `oracle:FILE`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Exact,
    CharNgram(usize),
    Embedding,
    Oracle(PathBuf),
}

impl FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("exact", None) => Ok(BackendSpec::Exact),
            ("embedding", None) => Ok(BackendSpec::Embedding),
            ("char-ngram", None) => Ok(BackendSpec::CharNgram(3)),
            ("char-ngram", Some(n)) => match n.parse() {
                Ok(n) if n > 0 => Ok(BackendSpec::CharNgram(n)),
                _ => Err(Error::Config(format!("bad n-gram size {n:?}"))),
            },
            ("oracle", Some(path)) if !path.is_empty() => Ok(BackendSpec::Oracle(path.into())),
            _ => Err(Error::Config(format!(
                "unknown backend {s:?}; expected exact, char-ngram[:N], embedding or oracle:FILE"
            ))),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Exact => f.write_str("exact"),
            BackendSpec::CharNgram(n) => write!(f, "char-ngram:{n}"),
            BackendSpec::Embedding => f.write_str("embedding"),
            BackendSpec::Oracle(p) => write!(f, "oracle:{}", p.display()),
        }
    }
}

impl Serialize for BackendSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Where embeddings come from when `--backend embedding` is selected.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingConfig {
    pub provider_url: Option<String>,
    pub model: String,
    pub cache: Option<PathBuf>,
}

/// Build the similarity backend. Embedding vectors are resolved up front for
/// every phrase the command will compare.
pub fn build_backend(
    spec: &BackendSpec,
    embedding: &EmbeddingConfig,
    phrases: impl IntoIterator<Item = NormalizedPhrase>,
) -> Result<SimilarityBackend> {
    Ok(match spec {
        BackendSpec::Exact => SimilarityBackend::Exact,
        BackendSpec::CharNgram(n) => SimilarityBackend::CharNgram { n: *n },
        BackendSpec::Oracle(path) => SimilarityBackend::Oracle(OracleTable::from_csv_path(path)?),
        BackendSpec::Embedding => {
            let mut cache = match &embedding.cache {
                Some(path) => EmbeddingCache::open(path)?,
                None => EmbeddingCache::in_memory(),
            };
            let provider: Box<dyn EmbeddingProvider> = match &embedding.provider_url {
                Some(url) => Box::new(HttpEmbeddingProvider::new(url, &embedding.model)),
                None => Box::new(CacheOnlyProvider::new(&embedding.model)),
            };
            let mut phrases: Vec<NormalizedPhrase> = phrases.into_iter().collect();
            phrases.sort();
            phrases.dedup();
            SimilarityBackend::Embedding(EmbeddingSimilarity::resolve(
                &phrases,
                provider.as_ref(),
                &mut cache,
                &EmbedOptions::default(),
            )?)
        }
    })
}

/// An input file and the SHA-256 of its bytes.
#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &str, path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Settings of one invocation, embedded verbatim in every report.
///
/// Contains no timestamps or host details, so identical inputs give
/// identical report bodies.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conflict_policy: Option<crate::model::ConflictPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub out: PathBuf,
    pub inputs: Vec<InputDigest>,
}

impl RunConfig {
    pub fn new(command: &'static str, out: &Path) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            theta: None,
            backend: None,
            embedding: None,
            conflict_policy: None,
            seed: None,
            iterations: None,
            grid: None,
            bins: None,
            format: None,
            out: out.to_path_buf(),
            inputs: Vec::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest::of(role, path)?);
        Ok(())
    }
}
