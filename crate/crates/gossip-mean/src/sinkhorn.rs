//! Associating a bistochastic matrix with a directed graph: total-support
//! test and Sinkhorn-Knopp alternating normalization.
//!
//! A nonnegative matrix `G` can be balanced into a bistochastic matrix of
//! the form `D1 G D2` (positive diagonal scalings) exactly when `G` has
//! total support: every positive entry lies on some permutation diagonal
//! whose entries are all positive.

use crate::matrix::{MatrixError, StochasticMatrix};
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SinkhornError {
    #[error("support matrix must be square and at least 2x2")]
    InvalidShape,
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row or column {index} is entirely zero")]
    ZeroLine { index: usize },
    #[error("matrix does not have total support; no bistochastic scaling exists")]
    NoTotalSupport,
    #[error("did not converge within {max_iter} iterations (residual {residual})")]
    NoConvergence { max_iter: usize, residual: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Nonnegative support pattern to be balanced. For a graph this is the
/// transpose of the adjacency matrix: `g_ij = 1` iff `j` sends to `i`.
#[derive(Debug, Clone)]
pub struct SupportMatrix {
    n: usize,
    entries: Array2<f64>,
}

impl SupportMatrix {
    pub fn from_entries(entries: Array2<f64>) -> Result<Self, SinkhornError> {
        let (rows, cols) = entries.dim();
        if rows != cols || rows < 2 {
            return Err(SinkhornError::InvalidShape);
        }
        for ((i, j), &v) in entries.indexed_iter() {
            if v < 0.0 {
                return Err(SinkhornError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        Ok(Self { n: rows, entries })
    }

    /// 0/1 support of a stochastic matrix.
    pub fn from_support_of(a: &StochasticMatrix) -> Self {
        let n = a.n();
        let mut entries = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if a.get(i, j) > 0.0 {
                    entries[(i, j)] = 1.0;
                }
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    fn positive_entries(&self) -> Vec<(usize, usize)> {
        self.entries
            .indexed_iter()
            .filter(|(_, &v)| v > 0.0)
            .map(|((i, j), _)| (i, j))
            .collect()
    }
}

/// Result of a successful balancing: `balanced = D1 G D2` is bistochastic.
#[derive(Debug, Clone)]
pub struct BalancingResult {
    pub balanced: StochasticMatrix,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub iterations: usize,
    /// Max deviation of any row or column sum of `balanced` from 1.
    pub residual: f64,
}

/// Tests total support: every positive entry `(i, j)` extends to a perfect
/// matching in the bipartite graph of positive entries.
///
/// Each entry is forced by deleting its row and column and asking for a
/// perfect matching on the remainder, via augmenting paths.
pub fn has_total_support(g: &SupportMatrix) -> bool {
    let n = g.n;
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| g.entries[(i, j)] > 0.0).collect())
        .collect();
    let positive = g.positive_entries();
    if positive.is_empty() {
        // No positive entries: the condition is vacuous.
        return true;
    }
    positive
        .iter()
        .all(|&(i, j)| perfect_matching_avoiding(&adjacency, n, i, j))
}

/// Perfect matching on rows != `skip_row` and columns != `skip_col`.
fn perfect_matching_avoiding(
    adjacency: &[Vec<usize>],
    n: usize,
    skip_row: usize,
    skip_col: usize,
) -> bool {
    let mut col_owner = vec![usize::MAX; n];
    col_owner[skip_col] = skip_row;
    for row in 0..n {
        if row == skip_row {
            continue;
        }
        let mut visited = vec![false; n];
        if !augment(
            adjacency,
            row,
            skip_col,
            &mut col_owner,
            &mut visited,
            skip_row,
        ) {
            return false;
        }
    }
    true
}

fn augment(
    adjacency: &[Vec<usize>],
    row: usize,
    skip_col: usize,
    col_owner: &mut [usize],
    visited: &mut [bool],
    skip_row: usize,
) -> bool {
    for &col in &adjacency[row] {
        if col == skip_col || visited[col] {
            continue;
        }
        visited[col] = true;
        let owner = col_owner[col];
        if owner == usize::MAX
            || (owner != skip_row
                && augment(adjacency, owner, skip_col, col_owner, visited, skip_row))
        {
            col_owner[col] = row;
            return true;
        }
    }
    false
}

/// Balances `g` into a bistochastic matrix by alternately normalizing rows
/// and columns. One iteration is one row pass plus one column pass.
///
/// Refuses up front when `g` lacks total support or has a zero row or
/// column. After convergence a final row pass is folded into `d1` so the
/// returned matrix is row-stochastic to machine precision; the reported
/// residual is then the worst column deviation, at most `tol`.
pub fn sinkhorn_knopp(
    g: &SupportMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<BalancingResult, SinkhornError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = g.n;
    for i in 0..n {
        if (0..n).all(|j| g.entries[(i, j)] == 0.0) {
            return Err(SinkhornError::ZeroLine { index: i });
        }
        if (0..n).all(|j| g.entries[(j, i)] == 0.0) {
            return Err(SinkhornError::ZeroLine { index: i });
        }
    }
    if !has_total_support(g) {
        return Err(SinkhornError::NoTotalSupport);
    }

    let mut m = g.entries.clone();
    let mut d1 = vec![1.0; n];
    let mut d2 = vec![1.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < max_iter {
        iterations += 1;
        normalize_rows(&mut m, &mut d1);
        normalize_cols(&mut m, &mut d2);
        // Columns are exact after the column pass; convergence is measured
        // on the rows.
        residual = max_row_deviation(&m);
        if residual <= tol {
            break;
        }
    }
    if residual > tol {
        return Err(SinkhornError::NoConvergence { max_iter, residual });
    }

    normalize_rows(&mut m, &mut d1);
    let residual = max_col_deviation(&m).max(max_row_deviation(&m));
    // The scaling pair is determined only up to (c d1, d2 / c); fix the
    // gauge by equalizing geometric means, which makes d1 = d2 for
    // symmetric inputs.
    let log_gap: f64 = d2
        .iter()
        .zip(d1.iter())
        .map(|(&b, &a)| b.ln() - a.ln())
        .sum::<f64>()
        / (2.0 * n as f64);
    let c = log_gap.exp();
    for v in &mut d1 {
        *v *= c;
    }
    for v in &mut d2 {
        *v /= c;
    }
    let balanced = StochasticMatrix::from_entries(m)?;
    Ok(BalancingResult {
        balanced,
        d1,
        d2,
        iterations,
        residual,
    })
}

fn normalize_rows(m: &mut Array2<f64>, d1: &mut [f64]) {
    for (i, mut row) in m.rows_mut().into_iter().enumerate() {
        let sum = row.sum();
        let inv = 1.0 / sum;
        row.mapv_inplace(|v| v * inv);
        d1[i] *= inv;
    }
}

fn normalize_cols(m: &mut Array2<f64>, d2: &mut [f64]) {
    for (j, mut col) in m.columns_mut().into_iter().enumerate() {
        let sum = col.sum();
        let inv = 1.0 / sum;
        col.mapv_inplace(|v| v * inv);
        d2[j] *= inv;
    }
}

fn max_row_deviation(m: &Array2<f64>) -> f64 {
    m.rows()
        .into_iter()
        .map(|r| (r.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

fn max_col_deviation(m: &Array2<f64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| (c.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}
