//! Corpus-level comparison of exact and character n-gram matching.
//!
//!     cargo run --example exact_vs_generalized

use aspect_eval::matching::Theta;
use aspect_eval::metrics::{macro_evaluate, EvalOptions};
use aspect_eval::model::{AnnotatedDocument, AspectPolarityPair, AspectSet, Corpus, Polarity, PredictionRecord};
use aspect_eval::similarity::SimilarityBackend;

fn set(id: &str, aspects: &[&str]) -> AspectSet {
    AspectSet::from_pairs(id, aspects.iter().map(|a| AspectPolarityPair::new(*a, Polarity::Positive).unwrap())).unwrap()
}

fn main() -> aspect_eval::Result<()> {
    let rows: &[(&str, &[&str], &[&str])] = &[
        ("1", &["battery life", "screen"], &["battery-life", "screen"]),
        ("2", &["wine list"], &["wine lists", "waiter"]),
        ("3", &["Food"], &["food"]),
        ("4", &["keyboard", "trackpad"], &[]),
    ];
    let corpus = Corpus::new(
        rows.iter()
            .map(|(id, g, _)| AnnotatedDocument { id: id.to_string(), text: String::new(), gold: set(id, g) })
            .collect(),
    )?;
    let predictions: Vec<PredictionRecord> = rows
        .iter()
        .map(|(id, _, d)| PredictionRecord { doc_id: id.to_string(), detected: set(id, d) })
        .collect();

    for theta in [1.0, 0.8, 0.6] {
        let theta = Theta::new(theta)?;
        let report =
            macro_evaluate(&corpus, &predictions, theta, &SimilarityBackend::char_trigram(), &EvalOptions::default())?;
        println!(
            "theta={:.2}  generalized F1={:.3}  exact F1={:.3}",
            theta.value(),
            report.generalized.f1,
            report.exact.f1
        );
    }
    Ok(())
}
