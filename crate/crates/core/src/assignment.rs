//! Exact rectangular linear sum assignment.
//!
//! [`solve_assignment`] returns a minimum-cost pairing of cardinality
//! `min(rows, cols)`. Among equal-cost optima it returns the lexicographically
//! smallest row-sorted pair list, so reports do not depend on solver internals.

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense row-major cost matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteCost {
                row: i / cols.max(1),
                col: i % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

/// One-to-one pairing of rows and columns, sorted by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl Pairing {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

type Pair = (usize, usize);

/// Solve the assignment problem on `cost`.
pub fn solve_assignment(cost: &CostMatrix) -> Result<Pairing> {
    if cost.rows == 0 || cost.cols == 0 {
        return Err(Error::InvalidShape(format!(
            "assignment needs a non-empty matrix, got {}x{}",
            cost.rows, cost.cols
        )));
    }
    let k = cost.rows.min(cost.cols);
    let max_abs = cost.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * (1.0 + max_abs * k as f64);

    let mut rows: Vec<usize> = (0..cost.rows).collect();
    let mut cols: Vec<usize> = (0..cost.cols).collect();
    let (mut best, mut current) = optimal(cost, &rows, &cols);
    let mut fixed: Vec<(usize, usize)> = Vec::with_capacity(k);

    // Fix pairs one at a time, each time taking the smallest pair that still
    // admits an optimal completion. `current` is always an optimal completion
    // of the remaining subproblem, so only pairs preceding its head are tried.
    while fixed.len() < k {
        let needed = k - fixed.len() - 1;
        let (head_r, head_c) = current[0];
        let mut chosen: Option<(Pair, Vec<Pair>, f64)> = None;

        'search: for (ri, &r) in rows.iter().enumerate() {
            if r > head_r {
                break;
            }
            let sub_rows = &rows[ri + 1..];
            for (ci, &c) in cols.iter().enumerate() {
                if r == head_r && c >= head_c {
                    break;
                }
                let sub_cols: Vec<usize> = cols
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != ci)
                    .map(|(_, &x)| x)
                    .collect();
                if sub_rows.len().min(sub_cols.len()) < needed {
                    continue;
                }
                let (sub_best, sub_pairs) = optimal(cost, sub_rows, &sub_cols);
                let total = cost.get(r, c) + sub_best;
                if total <= best + tol {
                    chosen = Some(((r, c), sub_pairs, sub_best));
                    break 'search;
                }
            }
        }

        let ((r, c), rest, rest_cost) = chosen.unwrap_or_else(|| {
            let rest = current[1..].to_vec();
            let rest_cost = rest.iter().map(|&(i, j)| cost.get(i, j)).sum();
            ((head_r, head_c), rest, rest_cost)
        });
        fixed.push((r, c));
        rows.retain(|&x| x > r);
        cols.retain(|&x| x != c);
        current = rest;
        best = rest_cost;
    }

    let total_cost = fixed.iter().map(|&(r, c)| cost.get(r, c)).sum();
    Ok(Pairing {
        pairs: fixed,
        total_cost,
    })
}

/// Optimal max-cardinality pairing restricted to the given rows and columns,
/// returned row-sorted together with its cost.
fn optimal(cost: &CostMatrix, rows: &[usize], cols: &[usize]) -> (f64, Vec<(usize, usize)>) {
    if rows.is_empty() || cols.is_empty() {
        return (0.0, Vec::new());
    }
    let mut pairs: Vec<(usize, usize)> = if rows.len() <= cols.len() {
        hungarian(rows.len(), cols.len(), |i, j| cost.get(rows[i], cols[j]))
            .into_iter()
            .enumerate()
            .map(|(i, j)| (rows[i], cols[j]))
            .collect()
    } else {
        hungarian(cols.len(), rows.len(), |j, i| cost.get(rows[i], cols[j]))
            .into_iter()
            .enumerate()
            .map(|(j, i)| (rows[i], cols[j]))
            .collect()
    };
    pairs.sort_unstable();
    let total = pairs.iter().map(|&(r, c)| cost.get(r, c)).sum();
    (total, pairs)
}

/// Shortest augmenting path assignment for an `n x m` problem with `n <= m`.
/// Returns the column assigned to each row.
fn hungarian(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(n <= m);
    // 1-based potentials and matching; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=m {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}
