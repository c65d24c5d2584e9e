//! Readers for the public ABSA dataset layouts.

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::model::{AnnotatedDocument, AspectPolarityPair, AspectSet, Polarity};

/// SemEval-2014 style XML: `sentence` elements with a `text` child and
/// `aspectTerms/aspectTerm[@term, @polarity]`. MAMS files share the layout
/// but carry no sentence ids; those get their 0-based position as id.
pub fn read_semeval_xml(source: &str, xml: &str) -> Result<Vec<AnnotatedDocument>> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| {
        let pos = e.pos();
        Error::parse(source, pos.row as usize, e.to_string())
    })?;
    let line_of = |node: roxmltree::Node| doc.text_pos_at(node.range().start).row as usize;

    let mut docs = Vec::new();
    for (index, sentence) in doc
        .descendants()
        .filter(|n| n.has_tag_name("sentence"))
        .enumerate()
    {
        let id = sentence
            .attribute("id")
            .map_or_else(|| index.to_string(), str::to_string);
        let text = sentence
            .children()
            .find(|n| n.has_tag_name("text"))
            .and_then(|n| n.text())
            .unwrap_or_default()
            .to_string();
        let mut gold = AspectSet::new();
        for term in sentence
            .children()
            .filter(|n| n.has_tag_name("aspectTerms"))
            .flat_map(|n| n.children().filter(|c| c.has_tag_name("aspectTerm")))
        {
            let line = line_of(term);
            let aspect = term
                .attribute("term")
                .ok_or_else(|| Error::parse(source, line, "aspectTerm without term"))?;
            let polarity: Polarity = term
                .attribute("polarity")
                .ok_or_else(|| Error::parse(source, line, "aspectTerm without polarity"))?
                .parse()
                .map_err(|e: Error| Error::parse(source, line, e.to_string()))?;
            let pair = AspectPolarityPair::new(aspect, polarity)
                .map_err(|e| Error::parse(source, line, e.to_string()))?;
            gold.insert(&id, pair)?;
        }
        docs.push(AnnotatedDocument { id, text, gold });
    }
    Ok(docs)
}

/// Three lines per example: sentence with a `$T$` placeholder, the target,
/// and a label in {-1, 0, 1}. Ids are 0-based example positions.
pub fn read_twitter(source: &str, content: &str) -> Result<Vec<AnnotatedDocument>> {
    let lines: Vec<&str> = content
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .collect();
    let used = lines
        .iter()
        .rposition(|l| !l.trim().is_empty())
        .map_or(0, |i| i + 1);
    if used % 3 != 0 {
        return Err(Error::parse(
            source,
            used,
            format!("{used} non-trailing lines is not a multiple of 3"),
        ));
    }
    let mut docs = Vec::with_capacity(used / 3);
    for (index, chunk) in lines[..used].chunks(3).enumerate() {
        let line = index * 3 + 1;
        let (sentence, target, label) = (chunk[0], chunk[1].trim(), chunk[2].trim());
        let polarity = match label {
            "-1" => Polarity::Negative,
            "0" => Polarity::Neutral,
            "1" => Polarity::Positive,
            other => {
                return Err(Error::parse(source, line + 2, format!("bad label {other:?}")));
            }
        };
        if !sentence.contains("$T$") {
            return Err(Error::parse(source, line, "sentence lacks the $T$ placeholder"));
        }
        let id = index.to_string();
        let pair = AspectPolarityPair::new(target, polarity)
            .map_err(|e| Error::parse(source, line + 1, e.to_string()))?;
        docs.push(AnnotatedDocument {
            text: sentence.replace("$T$", target),
            gold: AspectSet::from_pairs(&id, [pair])?,
            id,
        });
    }
    Ok(docs)
}

/// Sports feedback layout: a JSON array of
/// `{"id": .., "text": .., "annotations": {aspect: polarity, ..}}`.
/// Repeated keys inside `annotations` are kept for duplicate checking.
pub fn read_sport_json(source: &str, content: &str) -> Result<Vec<AnnotatedDocument>> {
    let records: Vec<SportRecord> = serde_json::from_str(content).map_err(|e| {
        Error::parse(source, e.line(), e.to_string())
    })?;
    records
        .into_iter()
        .map(|r| {
            let id = r.id.0;
            let mut gold = AspectSet::new();
            for (aspect, polarity) in r.annotations.0 {
                let polarity: Polarity = polarity
                    .parse()
                    .map_err(|e: Error| Error::parse(source, 0, format!("document {id:?}: {e}")))?;
                let pair = AspectPolarityPair::new(aspect, polarity)
                    .map_err(|e| Error::parse(source, 0, format!("document {id:?}: {e}")))?;
                gold.insert(&id, pair)?;
            }
            Ok(AnnotatedDocument {
                id,
                text: r.text,
                gold,
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct SportRecord {
    id: FlexibleId,
    text: String,
    #[serde(default)]
    annotations: PairList,
}

/// Document id given as a JSON string or number.
pub(crate) struct FlexibleId(pub String);

impl<'de> Deserialize<'de> for FlexibleId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => Ok(FlexibleId(s)),
            serde_json::Value::Number(n) => Ok(FlexibleId(n.to_string())),
            other => Err(serde::de::Error::custom(format!(
                "id must be a string or number, got {other}"
            ))),
        }
    }
}

/// A JSON object read as an ordered list of entries, repeats included.
#[derive(Default)]
struct PairList(Vec<(String, String)>);

impl<'de> Deserialize<'de> for PairList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PairVisitor;

        impl<'de> Visitor<'de> for PairVisitor {
            type Value = PairList;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping aspects to polarities")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<PairList, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(PairList(out))
            }
        }

        d.deserialize_map(PairVisitor)
    }
}
