//! Thresholded one-to-one matching of gold and detected aspects.
//!
//! [`intersect`] builds the similarity matrix `M[i][j] = σ(gold_i, detected_j)`,
//! zeroes every entry below θ, solves the assignment problem on `1 - M` and
//! keeps only the assigned pairs whose similarity reaches θ. Pairs the solver
//! is forced through zeroed cells (because it always pairs `min(|gold|,
//! |detected|)` elements) are therefore never counted as matches.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::error::{Error, Result};
use crate::model::NormalizedPhrase;
use crate::similarity::Similarity;

/// Minimum similarity for two aspects to match.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Theta(f64);

impl Theta {
    pub const DEFAULT: Theta = Theta(0.95);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidTheta(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Theta {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Theta {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

/// Pairwise similarities between the gold (rows) and detected (columns)
/// aspects of one document. Computed once and reused across thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn compute(
        gold: &[NormalizedPhrase],
        detected: &[NormalizedPhrase],
        backend: &dyn Similarity,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(gold.len() * detected.len());
        for g in gold {
            for d in detected {
                values.push(backend.score(g, d)?);
            }
        }
        Self::from_values(gold.len(), detected.len(), values)
    }

    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{} similarities for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidShape(format!("similarity {bad} outside [0, 1]")));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, gold: usize, detected: usize) -> f64 {
        self.values[gold * self.cols + detected]
    }
}

/// One matched (gold, detected) pair with its similarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub gold: usize,
    pub detected: usize,
    pub similarity: f64,
}

/// The matches found in one document.
///
/// Invariants: every pair has `similarity >= theta`, each gold and detected
/// index occurs at most once, pairs are sorted by gold index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchSet {
    pub doc_id: String,
    pub theta: Theta,
    pub pairs: Vec<MatchedPair>,
    pub gold_count: usize,
    pub detected_count: usize,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of similarities over matched pairs.
    pub fn total_similarity(&self) -> f64 {
        self.pairs.iter().map(|p| p.similarity).sum()
    }
}

/// Match `gold` against `detected` at threshold `theta`.
///
/// Both slices are expected to be free of duplicate phrases; either may be empty.
pub fn intersect(
    doc_id: &str,
    gold: &[NormalizedPhrase],
    detected: &[NormalizedPhrase],
    theta: Theta,
    backend: &dyn Similarity,
) -> Result<MatchSet> {
    let matrix = SimilarityMatrix::compute(gold, detected, backend)?;
    intersect_matrix(doc_id, &matrix, theta)
}

/// [`intersect`] over precomputed similarities.
pub fn intersect_matrix(doc_id: &str, matrix: &SimilarityMatrix, theta: Theta) -> Result<MatchSet> {
    let mut set = MatchSet {
        doc_id: doc_id.to_string(),
        theta,
        pairs: Vec::new(),
        gold_count: matrix.rows,
        detected_count: matrix.cols,
    };
    if matrix.rows == 0 || matrix.cols == 0 {
        return Ok(set);
    }
    let t = theta.value();
    let cost: Vec<f64> = matrix
        .values
        .iter()
        .map(|&s| if s < t { 1.0 } else { 1.0 - s })
        .collect();
    let pairing = solve_assignment(&CostMatrix::new(matrix.rows, matrix.cols, cost)?)?;
    set.pairs = pairing
        .pairs
        .into_iter()
        .map(|(gold, detected)| MatchedPair {
            gold,
            detected,
            similarity: matrix.get(gold, detected),
        })
        .filter(|p| p.similarity >= t)
        .collect();
    Ok(set)
}

/// A matched pair whose normalized phrases differ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonExactPair {
    pub detected: NormalizedPhrase,
    pub gold: NormalizedPhrase,
    pub similarity: f64,
}

/// Matched pairs that a case-insensitive set intersection would not find.
pub fn non_exact_pairs(
    matches: &MatchSet,
    gold: &[NormalizedPhrase],
    detected: &[NormalizedPhrase],
) -> Result<Vec<NonExactPair>> {
    if matches.gold_count != gold.len() || matches.detected_count != detected.len() {
        return Err(Error::IndexOutOfRange(format!(
            "match set was built for {}x{} aspects, got {}x{}",
            matches.gold_count,
            matches.detected_count,
            gold.len(),
            detected.len()
        )));
    }
    let mut out = Vec::new();
    for pair in &matches.pairs {
        let (Some(g), Some(d)) = (gold.get(pair.gold), detected.get(pair.detected)) else {
            return Err(Error::IndexOutOfRange(format!(
                "pair ({}, {}) outside the phrase sets",
                pair.gold, pair.detected
            )));
        };
        if g != d {
            out.push(NonExactPair {
                detected: d.clone(),
                gold: g.clone(),
                similarity: pair.similarity,
            });
        }
    }
    Ok(out)
}
