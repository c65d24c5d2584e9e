//! Agreement between raters, from categorical labels and from binned scores.
//!
//!     cargo run --example fleiss_kappa

use aspect_eval::stats::{bin_values, fleiss_kappa, Binning, RatingsTable};

fn main() -> aspect_eval::Result<()> {
    // one (item, label) per rating; every item has three raters
    let labels = [
        ("q1", "pos"), ("q1", "pos"), ("q1", "pos"),
        ("q2", "neg"), ("q2", "neg"), ("q2", "neu"),
        ("q3", "neu"), ("q3", "pos"), ("q3", "neu"),
        ("q4", "neg"), ("q4", "neg"), ("q4", "neg"),
    ];
    let table = RatingsTable::from_labels(labels)?;
    let k = fleiss_kappa(&table);
    println!("labels: kappa={:.4} (P_bar={:.4}, P_e={:.4})", k.kappa, k.p_bar, k.p_e);

    // 1-10 quality scores from three raters, binned at the pooled quartiles
    let scores = [[7.0, 8.0, 7.5], [2.0, 3.0, 2.0], [9.0, 9.5, 10.0], [5.0, 4.0, 6.0], [6.5, 7.0, 5.5]];
    let pooled: Vec<f64> = scores.iter().flatten().copied().collect();
    let (bins, edges) = bin_values(&pooled, &Binning::Quartiles)?;
    let binned = bins.chunks(3).enumerate().flat_map(|(item, row)| {
        row.iter().map(move |bin| (item.to_string(), format!("bin{bin}")))
    });
    let k = fleiss_kappa(&RatingsTable::from_labels(binned)?);
    println!("scores: edges={edges:?} kappa={:.4}", k.kappa);
    Ok(())
}
