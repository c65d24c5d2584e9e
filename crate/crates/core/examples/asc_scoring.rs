//! Sentiment scoring over matched aspects only.
//!
//!     cargo run --example asc_scoring

use aspect_eval::matching::{intersect, Theta};
use aspect_eval::metrics::asc_scores;
use aspect_eval::model::{AspectPolarityPair, AspectSet, ConflictPolicy, Polarity::*};
use aspect_eval::similarity::SimilarityBackend;

fn main() -> aspect_eval::Result<()> {
    let gold = AspectSet::from_pairs(
        "d",
        [
            AspectPolarityPair::new("pizza", Positive)?,
            AspectPolarityPair::new("service", Negative)?,
            AspectPolarityPair::new("price", Conflicting)?,
        ],
    )?;
    let detected = AspectSet::from_pairs(
        "d",
        [
            AspectPolarityPair::new("pizza", Positive)?,
            AspectPolarityPair::new("service", Positive)?,
            AspectPolarityPair::new("price", Neutral)?,
        ],
    )?;
    let m = intersect("d", &gold.phrases(), &detected.phrases(), Theta::DEFAULT, &SimilarityBackend::Exact)?;
    for policy in [ConflictPolicy::FoldToNeutral, ConflictPolicy::Strict] {
        let report = asc_scores(std::slice::from_ref(&m), &[&gold], &[&detected], policy);
        println!("{policy:?}: P={:.3} R={:.3} F1={:.3}", report.precision, report.recall, report.f1);
        for c in &report.classes {
            println!("  {:<11} tp={} fp={} fn={}", c.polarity.as_str(), c.counts.tp, c.counts.fp, c.counts.fn_);
        }
    }
    Ok(())
}
