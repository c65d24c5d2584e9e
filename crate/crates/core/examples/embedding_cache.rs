//! Embedding similarity with a custom provider and an on-disk vector cache.
//!
//! The second resolve is served entirely from the cache file.
//!
//!     cargo run --example embedding_cache

use std::sync::atomic::{AtomicUsize, Ordering};

use aspect_eval::matching::{intersect, Theta};
use aspect_eval::model::normalize_phrase;
use aspect_eval::similarity::{
    EmbedOptions, EmbeddingCache, EmbeddingProvider, EmbeddingSimilarity, EmbeddingVector, SimilarityBackend,
};

/// Bag-of-letters vectors; good enough to tell spelling variants apart.
struct Letters {
    calls: AtomicUsize,
}

impl EmbeddingProvider for Letters {
    fn id(&self) -> &str {
        "letters-v1"
    }

    fn embed(&self, texts: &[String]) -> aspect_eval::Result<Vec<EmbeddingVector>> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        texts
            .iter()
            .map(|t| {
                let mut v = vec![0.0; 26];
                for b in t.bytes().filter(u8::is_ascii_lowercase) {
                    v[(b - b'a') as usize] += 1.0;
                }
                EmbeddingVector::new(v)
            })
            .collect()
    }
}

fn main() -> aspect_eval::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("vectors.jsonl");

    let gold = ["waiter", "menu"].map(|p| normalize_phrase(p).unwrap());
    let detected = ["waitress", "menus", "parking"].map(|p| normalize_phrase(p).unwrap());
    let phrases: Vec<_> = gold.iter().chain(&detected).cloned().collect();
    let provider = Letters { calls: AtomicUsize::new(0) };

    for round in 1..=2 {
        let mut cache = EmbeddingCache::open(&path)?;
        let table = EmbeddingSimilarity::resolve(&phrases, &provider, &mut cache, &EmbedOptions::default())?;
        let matches = intersect("d", &gold, &detected, Theta::new(0.9)?, &SimilarityBackend::Embedding(table))?;
        println!(
            "round {round}: {} matches, provider calls so far {}, cached vectors {}",
            matches.len(),
            provider.calls.load(Ordering::SeqCst),
            cache.len()
        );
    }
    Ok(())
}
