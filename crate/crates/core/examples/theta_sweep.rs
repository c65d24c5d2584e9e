//! How many non-exact matches appear as the threshold drops.
//!
//!     cargo run --example theta_sweep

use aspect_eval::model::{AnnotatedDocument, AspectPolarityPair, AspectSet, Corpus, Polarity, PredictionRecord};
use aspect_eval::stats::{theta_sweep, Grid, SystemPredictions};
use aspect_eval::similarity::SimilarityBackend;

fn set(aspects: &[&str]) -> AspectSet {
    AspectSet::from_pairs("d", aspects.iter().map(|a| AspectPolarityPair::new(*a, Polarity::Neutral).unwrap())).unwrap()
}

fn main() -> aspect_eval::Result<()> {
    let gold = [vec!["battery life", "screen"], vec!["wine list", "service"], vec!["price"]];
    let corpus = Corpus::new(
        gold.iter()
            .enumerate()
            .map(|(i, g)| AnnotatedDocument { id: i.to_string(), text: String::new(), gold: set(g) })
            .collect(),
    )?;
    let system = |rows: [&[&str]; 3]| {
        rows.iter().enumerate().map(|(i, d)| PredictionRecord { doc_id: i.to_string(), detected: set(d) }).collect()
    };
    let systems = [
        SystemPredictions { system: "a".into(), predictions: system([&["battery", "screens"], &["wine lists"], &["prices"]]) },
        SystemPredictions { system: "b".into(), predictions: system([&["battery life"], &["services"], &["pricing"]]) },
    ];
    let out = theta_sweep(&corpus, &systems, &Grid::parse("0.5:1:0.1")?, &SimilarityBackend::char_trigram(), None)?;
    println!("theta  matched  non-exact  exact");
    for row in &out.rows {
        println!("{:5.2}  {:7}  {:9}  {:5}", row.theta.value(), row.matched_pairs, row.non_exact_pairs, row.exact_pairs);
    }
    for p in out.pairs.iter().filter(|p| p.theta.value() == 0.5) {
        println!("  {} / doc {}: {:?} ~ {:?} ({:.3})", p.system, p.doc_id, p.detected, p.gold, p.similarity);
    }
    Ok(())
}
