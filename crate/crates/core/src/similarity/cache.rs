use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EmbeddingVector;
use crate::error::{Error, Result};
use crate::model::NormalizedPhrase;

/// One line of the cache file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub provider: String,
    pub text: String,
    pub dim: usize,
    pub vector: Vec<f64>,
}

/// Embeddings keyed by `(provider id, normalized phrase)`, optionally backed
/// by an append-only JSON Lines file in which the last record for a key wins.
///
/// Lookups take `&self`; inserts take `&mut self`, so sharing across threads
/// goes through a `RwLock` owned by the caller.
#[derive(Debug, Default)]
pub struct EmbeddingCache {
    path: Option<PathBuf>,
    entries: HashMap<(String, String), EmbeddingVector>,
    dims: HashMap<String, usize>,
}

impl EmbeddingCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open (or lazily create) a cache file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cache = Self {
            path: Some(path.to_path_buf()),
            ..Self::default()
        };
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(Error::io(path, e)),
        };
        let source = path.display().to_string();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: CacheRecord = serde_json::from_str(&line)
                .map_err(|e| Error::parse(&source, i + 1, e.to_string()))?;
            if record.dim != record.vector.len() {
                return Err(Error::parse(
                    &source,
                    i + 1,
                    format!("dim {} but {} values", record.dim, record.vector.len()),
                ));
            }
            if let Some(&d) = cache.dims.get(&record.provider) {
                if d != record.dim {
                    return Err(Error::parse(
                        &source,
                        i + 1,
                        format!("provider {:?} mixes dimensions {d} and {}", record.provider, record.dim),
                    ));
                }
            }
            let vector = EmbeddingVector::new(record.vector)
                .map_err(|e| Error::parse(&source, i + 1, e.to_string()))?;
            cache.dims.insert(record.provider.clone(), record.dim);
            cache.entries.insert((record.provider, record.text), vector);
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, provider: &str, phrase: &NormalizedPhrase) -> Option<&EmbeddingVector> {
        // HashMap<(String, String)> cannot be probed with borrowed tuples
        self.entries
            .get(&(provider.to_string(), phrase.as_str().to_string()))
    }

    pub fn contains(&self, provider: &str, phrase: &NormalizedPhrase) -> bool {
        self.get(provider, phrase).is_some()
    }

    /// Dimension of the vectors stored for `provider`, if any.
    pub fn dimension(&self, provider: &str) -> Option<usize> {
        self.dims.get(provider).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Store a batch of vectors for one provider.
    ///
    /// The batch is written to the backing file with a single append followed
    /// by `fsync`; nothing is inserted in memory unless the write succeeded.
    pub fn insert_batch(
        &mut self,
        provider: &str,
        batch: Vec<(NormalizedPhrase, EmbeddingVector)>,
    ) -> Result<()> {
        if batch.is_empty() {
            return Ok(());
        }
        let expected = self.dimension(provider).unwrap_or(batch[0].1.dim());
        if let Some((_, bad)) = batch.iter().find(|(_, v)| v.dim() != expected) {
            return Err(Error::ProviderDimensionChanged {
                provider: provider.to_string(),
                expected,
                got: bad.dim(),
            });
        }

        if let Some(path) = &self.path {
            let mut buf = Vec::new();
            for (phrase, vector) in &batch {
                let record = CacheRecord {
                    provider: provider.to_string(),
                    text: phrase.as_str().to_string(),
                    dim: vector.dim(),
                    vector: vector.values().to_vec(),
                };
                serde_json::to_writer(&mut buf, &record)?;
                buf.push(b'\n');
            }
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            file.write_all(&buf).map_err(|e| Error::io(path, e))?;
            file.sync_data().map_err(|e| Error::io(path, e))?;
        }

        self.dims.insert(provider.to_string(), expected);
        for (phrase, vector) in batch {
            self.entries
                .insert((provider.to_string(), phrase.into_string()), vector);
        }
        Ok(())
    }
}
