//! Tolerant reading of `{"aspect": "Polarity", ...}` dictionaries emitted by
//! language models.
//!
//! Accepted noise: markdown fences, a leading `3.`-style item number, prose
//! around the object, single-quoted or bare keys and values, trailing commas,
//! mixed-case polarities. Anything unusable is skipped and reported as a
//! diagnostic; parsing never fails.

use serde::Serialize;

use crate::model::{AspectPolarityPair, AspectSet, Polarity};

const RESIDUE_LIMIT: usize = 200;

/// Pairs recovered from one model response plus notes about what was skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AnnotationParse {
    #[serde(skip)]
    pub pairs: AspectSet,
    pub diagnostics: Vec<String>,
}

impl AnnotationParse {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Extract aspect/polarity pairs from the first balanced `{...}` block.
pub fn parse_llm_annotation(text: &str) -> AnnotationParse {
    let chars: Vec<char> = text.chars().collect();
    let mut out = AnnotationParse::default();

    let Some(start) = chars.iter().position(|&c| c == '{') else {
        out.diagnostics
            .push(format!("no annotation object found in {:?}", residue(&chars)));
        return out;
    };
    let end = match balanced_end(&chars, start, true).or_else(|| balanced_end(&chars, start, false)) {
        Some(end) => end,
        None => {
            out.diagnostics.push(format!(
                "unbalanced annotation object: {:?}",
                residue(&chars[start..])
            ));
            return out;
        }
    };

    let mut parser = ObjectParser {
        chars: &chars[start..=end],
        pos: 1,
        diagnostics: &mut out.diagnostics,
    };
    let entries = parser.entries();
    for (key, value) in entries {
        let polarity = match value.parse::<Polarity>() {
            Ok(p) => p,
            Err(_) => {
                out.diagnostics
                    .push(format!("skipped {key:?}: unknown polarity {value:?}"));
                continue;
            }
        };
        let pair = match AspectPolarityPair::new(key.clone(), polarity) {
            Ok(p) => p,
            Err(e) => {
                out.diagnostics.push(format!("skipped {key:?}: {e}"));
                continue;
            }
        };
        if let Err(e) = out.pairs.insert("", pair) {
            out.diagnostics.push(format!("kept first occurrence: {e}"));
        }
    }
    out
}

/// Parse a multi-document response with one numbered line per document,
/// such as `1. {"Organization":"Negative"}`. Lines without a leading number
/// or without a `{` are ignored.
pub fn parse_numbered_responses(text: &str) -> Vec<(usize, AnnotationParse)> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim_start();
        let digits: String = line.chars().take_while(char::is_ascii_digit).collect();
        if digits.is_empty() || !line.contains('{') {
            continue;
        }
        let Ok(number) = digits.parse::<usize>() else { continue };
        out.push((number, parse_llm_annotation(&line[digits.len()..])));
    }
    out
}

fn residue(chars: &[char]) -> String {
    let s: String = chars.iter().take(RESIDUE_LIMIT).collect();
    if chars.len() > RESIDUE_LIMIT {
        format!("{s}...")
    } else {
        s
    }
}

/// Index of the brace closing the one at `start`. With `single_quotes` set,
/// `'` delimits strings as well as `"`.
fn balanced_end(chars: &[char], start: usize, single_quotes: bool) -> Option<usize> {
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate().skip(start) {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' => quote = Some('"'),
            '\'' if single_quotes => quote = Some('\''),
            '{' => depth += 1,
            '}' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

struct ObjectParser<'a> {
    chars: &'a [char],
    pos: usize,
    diagnostics: &'a mut Vec<String>,
}

impl ObjectParser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    /// Top-level entries of the object; the closing brace is the last char.
    fn entries(&mut self) -> Vec<(String, String)> {
        let mut entries = Vec::new();
        let last = self.chars.len() - 1;
        loop {
            self.skip_ws();
            while self.peek() == Some(',') {
                self.pos += 1;
                self.skip_ws();
            }
            if self.pos >= last {
                break;
            }
            let key = self.token(&[':', ',']);
            self.skip_ws();
            if self.peek() != Some(':') {
                self.diagnostics
                    .push(format!("entry {key:?} has no ':' separator"));
                self.resync();
                continue;
            }
            self.pos += 1;
            self.skip_ws();
            if matches!(self.peek(), Some('{') | Some('[')) {
                self.diagnostics
                    .push(format!("skipped {key:?}: nested value"));
                self.skip_nested();
                self.resync();
                continue;
            }
            let value = self.token(&[',']);
            entries.push((key, value));
            self.skip_ws();
            if self.pos < last && self.peek() != Some(',') {
                let rest: String = self.chars[self.pos..last].iter().collect();
                self.diagnostics
                    .push(format!("unexpected text after {:?}: {:?}", entries.last().map(|e| &e.0), rest));
                self.resync();
            }
        }
        entries
    }

    /// A quoted string, or bare text up to one of `stops` or the closing brace.
    fn token(&mut self, stops: &[char]) -> String {
        let last = self.chars.len() - 1;
        match self.peek() {
            Some(q @ ('"' | '\'')) => {
                self.pos += 1;
                let mut s = String::new();
                while self.pos < last {
                    let c = self.chars[self.pos];
                    self.pos += 1;
                    if c == q {
                        return s;
                    }
                    if c == '\\' {
                        s.push(self.escape());
                    } else {
                        s.push(c);
                    }
                }
                self.diagnostics.push(format!("unterminated string {s:?}"));
                s
            }
            _ => {
                let begin = self.pos;
                while self.pos < last && !stops.contains(&self.chars[self.pos]) {
                    self.pos += 1;
                }
                self.chars[begin..self.pos].iter().collect::<String>().trim().to_string()
            }
        }
    }

    fn escape(&mut self) -> char {
        let Some(&c) = self.chars.get(self.pos) else { return '\\' };
        self.pos += 1;
        match c {
            'n' => '\n',
            't' => '\t',
            'r' => '\r',
            'u' => {
                let hex: String = self.chars.iter().skip(self.pos).take(4).collect();
                match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                    Some(ch) if hex.len() == 4 => {
                        self.pos += 4;
                        ch
                    }
                    _ => 'u',
                }
            }
            other => other,
        }
    }

    fn skip_nested(&mut self) {
        let end = balanced_end_any(self.chars, self.pos);
        self.pos = end.map_or(self.chars.len() - 1, |e| e + 1);
    }

    /// Advance past the next top-level comma.
    fn resync(&mut self) {
        let last = self.chars.len() - 1;
        let mut quote = None;
        while self.pos < last {
            let c = self.chars[self.pos];
            self.pos += 1;
            match (quote, c) {
                (Some(q), c) if c == q => quote = None,
                (Some(_), _) => {}
                (None, '"') => quote = Some('"'),
                (None, ',') => return,
                _ => {}
            }
        }
    }
}

fn balanced_end_any(chars: &[char], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_str = false;
    for (i, &c) in chars.iter().enumerate().skip(start) {
        if in_str {
            if c == '"' {
                in_str = false;
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' | '[' => depth += 1,
            '}' | ']' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}
