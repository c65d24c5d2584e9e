//! Turning free-form model responses into aspect sets.
//!
//!     cargo run --example llm_output_parsing

use aspect_eval::io::{parse_llm_annotation, parse_numbered_responses};

fn main() {
    let single = r#"Sure! Here is the annotation: {"Food quality": "Negative", "staff":"positive"} Hope it helps."#;
    let parsed = parse_llm_annotation(single);
    for pair in parsed.pairs.iter() {
        println!("{} -> {}", pair.aspect(), pair.polarity().as_str());
    }

    let batch = "1. {\"Organization\":\"Negative\"}\n\
                 2. {\"Weather preparedness\":\"Negative\", \"Sun protection\":\"Negative\"}\n\
                 3. {\"parking\": \"great\"\n\
                 4. no aspects here";
    for (n, parse) in parse_numbered_responses(batch) {
        println!("#{n}: {} pairs, diagnostics {:?}", parse.pairs.len(), parse.diagnostics);
    }
}
