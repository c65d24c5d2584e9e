//! Generalized intersection on a single review, with hand-written similarities.
//!
//!     cargo run --example figure_intersection

use aspect_eval::matching::{intersect, Theta};
use aspect_eval::metrics::{exact_match_scores, extraction_scores};
use aspect_eval::model::{AspectPolarityPair, AspectSet, Polarity::*};
use aspect_eval::similarity::{OracleTable, SimilarityBackend};

fn main() -> aspect_eval::Result<()> {
    let gold = AspectSet::from_pairs(
        "review",
        [
            AspectPolarityPair::new("AC", Negative)?,
            AspectPolarityPair::new("look", Positive)?,
            AspectPolarityPair::new("ambience", Positive)?,
            AspectPolarityPair::new("service", Negative)?,
        ],
    )?;
    let detected = AspectSet::from_pairs(
        "review",
        [
            AspectPolarityPair::new("air conditioner", Negative)?,
            AspectPolarityPair::new("appearance", Positive)?,
            AspectPolarityPair::new("dishes", Positive)?,
            AspectPolarityPair::new("service", Negative)?,
            AspectPolarityPair::new("drinks", Neutral)?,
        ],
    )?;

    let mut sims = OracleTable::new("hand-written");
    sims.insert("AC", "air conditioner", 0.97)?;
    sims.insert("look", "appearance", 0.96)?;
    sims.insert("ambience", "appearance", 0.62)?;
    sims.insert("ambience", "drinks", 0.41)?;
    sims.insert("service", "dishes", 0.55)?;
    let backend = SimilarityBackend::Oracle(sims);

    let matches = intersect("review", &gold.phrases(), &detected.phrases(), Theta::DEFAULT, &backend)?;
    for m in &matches.pairs {
        println!(
            "{:>10} <-> {:<16} sigma = {:.2}",
            gold.as_slice()[m.gold].aspect(),
            detected.as_slice()[m.detected].aspect(),
            m.similarity
        );
    }
    let g = extraction_scores(&matches);
    let e = exact_match_scores("review", &gold, &detected);
    println!("generalized P={:.3} R={:.3} F1={:.3}", g.precision, g.recall, g.f1);
    println!("exact       P={:.3} R={:.3} F1={:.3}", e.precision, e.recall, e.f1);
    Ok(())
}
