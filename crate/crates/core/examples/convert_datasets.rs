//! Read a SemEval-style XML file and write canonical JSONL.
//!
//!     cargo run --example convert_datasets -- path/to/Restaurants_Test_Gold.xml out.jsonl
//!
//! Without arguments a small inline file is converted to stdout.

use aspect_eval::io::{parse_corpus, write_corpus, CorpusFormat, CorpusSummary};

const SAMPLE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<sentences>
  <sentence id="1">
    <text>The sushi was fresh but the waiter ignored us.</text>
    <aspectTerms>
      <aspectTerm term="sushi" polarity="positive" from="4" to="9"/>
      <aspectTerm term="waiter" polarity="negative" from="28" to="34"/>
    </aspectTerms>
  </sentence>
  <sentence id="2">
    <text>Would come back.</text>
  </sentence>
</sentences>"#;

fn main() -> aspect_eval::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [input, output] = args.as_slice() {
        let summary = aspect_eval::io::convert(input, CorpusFormat::SemevalXml, output)?;
        println!("{summary}");
        return Ok(());
    }
    let corpus = parse_corpus("inline.xml", SAMPLE, CorpusFormat::SemevalXml)?;
    write_corpus(std::io::stdout().lock(), corpus.documents())?;
    eprintln!("{}", CorpusSummary::of(&corpus));
    Ok(())
}
