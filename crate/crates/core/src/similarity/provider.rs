use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbeddingCache, EmbeddingVector};
use crate::error::{Error, Result};
use crate::model::NormalizedPhrase;

/// A source of sentence embeddings.
pub trait EmbeddingProvider: Send + Sync {
    /// Provider id used as the cache namespace.
    fn id(&self) -> &str;

    /// Embed `texts`, returning one vector per input in input order.
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    #[allow(dead_code)]
    model: String,
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

/// Client for an embedding service exposing `POST /embed`.
///
/// Request body: `{"model": .., "texts": [..]}`; a 200 response carries
/// `{"model": .., "dim": .., "vectors": [[..], ..]}` aligned with `texts`.
pub struct HttpEmbeddingProvider {
    endpoint: String,
    model: String,
    agent: ureq::Agent,
}

impl HttpEmbeddingProvider {
    pub fn new(base_url: &str, model: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self {
            endpoint: format!("{}/embed", base_url.trim_end_matches('/')),
            model: model.into(),
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn id(&self) -> &str {
        &self.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let unreachable = |msg: String| Error::ProviderUnreachable(format!("{}: {msg}", self.endpoint));
        let mut response = self
            .agent
            .post(&self.endpoint)
            .send_json(EmbedRequest {
                model: &self.model,
                texts,
            })
            .map_err(|e| unreachable(e.to_string()))?;
        if response.status() != 200 {
            return Err(unreachable(format!("status {}", response.status())));
        }
        let body: EmbedResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| unreachable(format!("bad response body: {e}")))?;
        if body.vectors.len() != texts.len() {
            return Err(unreachable(format!(
                "{} vectors for {} texts",
                body.vectors.len(),
                texts.len()
            )));
        }
        if body.dim == 0 || body.vectors.iter().any(|v| v.len() != body.dim) {
            return Err(unreachable(format!(
                "vectors do not match declared dim {}",
                body.dim
            )));
        }
        body.vectors
            .into_iter()
            .map(|v| EmbeddingVector::new(v).map_err(|e| unreachable(e.to_string())))
            .collect()
    }
}

/// Provider that never fetches; every cache miss is reported as missing.
pub struct CacheOnlyProvider {
    id: String,
}

impl CacheOnlyProvider {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into() }
    }
}

impl EmbeddingProvider for CacheOnlyProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        Err(Error::MissingEmbedding(
            texts.first().cloned().unwrap_or_default(),
        ))
    }
}

/// Batching and concurrency limits for [`embed_batch`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedOptions {
    pub batch_size: usize,
    pub max_parallel: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_parallel: 4,
        }
    }
}

/// Embed `phrases`, consulting `cache` first.
///
/// Misses are deduplicated, fetched from `provider` in batches with at most
/// `options.max_parallel` requests in flight, checked against the dimension
/// already cached for the provider and persisted in one flush. The output is
/// aligned with `phrases`.
pub fn embed_batch(
    phrases: &[NormalizedPhrase],
    provider: &dyn EmbeddingProvider,
    cache: &mut EmbeddingCache,
    options: &EmbedOptions,
) -> Result<Vec<EmbeddingVector>> {
    if phrases.is_empty() {
        return Err(Error::EmptyInput("no phrases to embed".into()));
    }
    let id = provider.id().to_string();

    let mut seen = HashSet::new();
    let misses: Vec<&NormalizedPhrase> = phrases
        .iter()
        .filter(|p| !cache.contains(&id, p) && seen.insert(*p))
        .collect();

    if !misses.is_empty() {
        let fetched = fetch_parallel(&misses, provider, options)?;
        let expected = cache
            .dimension(&id)
            .unwrap_or_else(|| fetched[0].dim());
        if let Some(bad) = fetched.iter().find(|v| v.dim() != expected) {
            return Err(Error::ProviderDimensionChanged {
                provider: id,
                expected,
                got: bad.dim(),
            });
        }
        let batch = misses.into_iter().cloned().zip(fetched).collect();
        cache.insert_batch(&id, batch)?;
    }

    phrases
        .iter()
        .map(|p| {
            cache
                .get(&id, p)
                .cloned()
                .ok_or_else(|| Error::MissingEmbedding(p.to_string()))
        })
        .collect()
}

fn fetch_parallel(
    misses: &[&NormalizedPhrase],
    provider: &dyn EmbeddingProvider,
    options: &EmbedOptions,
) -> Result<Vec<EmbeddingVector>> {
    let chunks: Vec<Vec<String>> = misses
        .chunks(options.batch_size.max(1))
        .map(|c| c.iter().map(|p| p.as_str().to_string()).collect())
        .collect();
    let results: Mutex<Vec<Option<Result<Vec<EmbeddingVector>>>>> =
        Mutex::new((0..chunks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = options.max_parallel.clamp(1, chunks.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(chunk) = chunks.get(i) else { break };
                let out = provider.embed(chunk).and_then(|vectors| {
                    if vectors.len() == chunk.len() {
                        Ok(vectors)
                    } else {
                        Err(Error::ProviderUnreachable(format!(
                            "provider returned {} vectors for {} texts",
                            vectors.len(),
                            chunk.len()
                        )))
                    }
                });
                results.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });

    let mut out = Vec::with_capacity(misses.len());
    for result in results.into_inner().expect("worker panicked") {
        out.extend(result.expect("every chunk is processed")?);
    }
    Ok(out)
}
