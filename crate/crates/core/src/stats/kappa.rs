//! Fleiss' kappa for a fixed number of raters per item.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// `counts[i][j]`: raters assigning item `i` to category `j`.
/// Every row sums to the same rater count `n >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingsTable {
    counts: Vec<Vec<usize>>,
    raters: usize,
    categories: Vec<String>,
}

impl RatingsTable {
    pub fn new(counts: Vec<Vec<usize>>) -> Result<Self> {
        let width = counts.first().map_or(0, Vec::len);
        let categories = (0..width).map(|j| j.to_string()).collect();
        Self::with_categories(counts, categories)
    }

    pub fn with_categories(counts: Vec<Vec<usize>>, categories: Vec<String>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidRatings("no items".into()));
        }
        if categories.is_empty() {
            return Err(Error::InvalidRatings("no categories".into()));
        }
        if counts.iter().any(|row| row.len() != categories.len()) {
            return Err(Error::InvalidRatings("rows differ in category count".into()));
        }
        let raters: usize = counts[0].iter().sum();
        if raters < 2 {
            return Err(Error::InvalidRatings(format!(
                "at least 2 raters per item required, got {raters}"
            )));
        }
        for (i, row) in counts.iter().enumerate() {
            let got: usize = row.iter().sum();
            if got != raters {
                return Err(Error::RaggedRatings {
                    item: i.to_string(),
                    expected: raters,
                    got,
                });
            }
        }
        Ok(Self {
            counts,
            raters,
            categories,
        })
    }

    /// Build from `(item, label)` observations, one per rating.
    ///
    /// Items keep first-seen order; categories are the sorted distinct labels.
    pub fn from_labels<I, S, L>(ratings: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, L)>,
        S: Into<String>,
        L: Into<String>,
    {
        let mut items: Vec<(String, Vec<String>)> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for (item, label) in ratings {
            let item = item.into();
            let slot = *index.entry(item.clone()).or_insert_with(|| {
                items.push((item, Vec::new()));
                items.len() - 1
            });
            items[slot].1.push(label.into());
        }
        if items.is_empty() {
            return Err(Error::InvalidRatings("no ratings".into()));
        }
        let expected = items[0].1.len();
        if let Some((item, labels)) = items.iter().find(|(_, l)| l.len() != expected) {
            return Err(Error::RaggedRatings {
                item: item.clone(),
                expected,
                got: labels.len(),
            });
        }
        let categories: Vec<String> = items
            .iter()
            .flat_map(|(_, l)| l.iter().cloned())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let col: BTreeMap<&str, usize> = categories
            .iter()
            .enumerate()
            .map(|(j, c)| (c.as_str(), j))
            .collect();
        let counts = items
            .iter()
            .map(|(_, labels)| {
                let mut row = vec![0; categories.len()];
                for l in labels {
                    row[col[l.as_str()]] += 1;
                }
                row
            })
            .collect();
        Self::with_categories(counts, categories)
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaResult {
    pub kappa: f64,
    /// Mean observed agreement.
    pub p_bar: f64,
    /// Agreement expected by chance.
    pub p_e: f64,
    pub items: usize,
    pub raters: usize,
    pub categories: usize,
    /// Set when chance agreement is 1 (a single category used throughout);
    /// kappa is then reported as 1 by convention.
    pub degenerate: bool,
}

pub fn fleiss_kappa(table: &RatingsTable) -> KappaResult {
    let n = table.raters as f64;
    let items = table.items() as f64;
    let k = table.categories.len();

    let p_bar = table
        .counts
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|&c| (c * c) as f64).sum();
            (sq - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / items;

    let total = items * n;
    let p_e: f64 = (0..k)
        .map(|j| {
            let pj = table.counts.iter().map(|row| row[j]).sum::<usize>() as f64 / total;
            pj * pj
        })
        .sum();

    let degenerate = (1.0 - p_e).abs() < 1e-12;
    let kappa = if degenerate {
        1.0
    } else {
        (p_bar - p_e) / (1.0 - p_e)
    };
    KappaResult {
        kappa,
        p_bar,
        p_e,
        items: table.items(),
        raters: table.raters,
        categories: k,
        degenerate,
    }
}

/// How continuous ratings are mapped onto categories before computing kappa.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    /// Edges at the 25th, 50th and 75th percentiles of the pooled values.
    Quartiles,
    /// Explicit ascending edges; `k` edges give `k + 1` bins.
    Edges(Vec<f64>),
}

/// Bin index of every value plus the edges used.
///
/// A value `v` falls into bin `i` where `edges[i - 1] < v <= edges[i]`.
pub fn bin_values(values: &[f64], binning: &Binning) -> Result<(Vec<usize>, Vec<f64>)> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidRatings("non-finite rating".into()));
    }
    let edges = match binning {
        Binning::Edges(edges) => {
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("bin edges must be strictly increasing".into()));
            }
            edges.clone()
        }
        Binning::Quartiles => {
            if values.is_empty() {
                return Err(Error::InvalidRatings("no values to bin".into()));
            }
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            [0.25, 0.5, 0.75].iter().map(|&q| quantile(&sorted, q)).collect()
        }
    };
    let bins = values
        .iter()
        .map(|&v| edges.partition_point(|&e| e < v))
        .collect();
    Ok((bins, edges))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unanimous_agreement() {
        let t = RatingsTable::new(vec![vec![3, 0], vec![0, 3], vec![3, 0]]).unwrap();
        let k = fleiss_kappa(&t);
        assert!((k.kappa - 1.0).abs() < 1e-12);
        assert!(!k.degenerate);
    }

    #[test]
    fn single_category_is_degenerate() {
        let t = RatingsTable::new(vec![vec![4, 0], vec![4, 0]]).unwrap();
        let k = fleiss_kappa(&t);
        assert!(k.degenerate);
        assert_eq!(k.kappa, 1.0);
    }

    #[test]
    fn uniform_split_is_below_chance() {
        let t = RatingsTable::new(vec![vec![2, 2]; 6]).unwrap();
        let k = fleiss_kappa(&t);
        // P_i = (4 + 4 - 4) / 12 = 1/3, P_e = 1/2
        assert!((k.p_bar - 1.0 / 3.0).abs() < 1e-15);
        assert!((k.kappa - (-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(RatingsTable::new(vec![]).is_err());
        assert!(RatingsTable::new(vec![vec![1, 0]]).is_err());
        assert!(matches!(
            RatingsTable::new(vec![vec![2, 1], vec![1, 1]]),
            Err(Error::RaggedRatings { expected: 3, got: 2, .. })
        ));
    }

    #[test]
    fn labels_are_counted() {
        let t = RatingsTable::from_labels([
            ("i1", "a"),
            ("i1", "b"),
            ("i2", "b"),
            ("i2", "b"),
        ])
        .unwrap();
        assert_eq!(t.categories(), &["a".to_string(), "b".to_string()]);
        assert_eq!(t.counts(), &[vec![1, 1], vec![0, 2]]);
        assert!(matches!(
            RatingsTable::from_labels([("i1", "a"), ("i1", "b"), ("i2", "b")]),
            Err(Error::RaggedRatings { .. })
        ));
    }

    #[test]
    fn quartile_binning() {
        let values: Vec<f64> = (1..=9).map(f64::from).collect();
        let (bins, edges) = bin_values(&values, &Binning::Quartiles).unwrap();
        assert_eq!(edges, vec![3.0, 5.0, 7.0]);
        assert_eq!(bins, vec![0, 0, 0, 1, 1, 2, 2, 3, 3]);
        let (bins, _) = bin_values(&[0.5, 2.0, 2.5], &Binning::Edges(vec![1.0, 2.0])).unwrap();
        assert_eq!(bins, vec![0, 1, 2]);
        assert!(bin_values(&[1.0], &Binning::Edges(vec![2.0, 1.0])).is_err());
    }
}
