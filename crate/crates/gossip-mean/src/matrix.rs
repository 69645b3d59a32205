//! Construction, validation and graph diagnostics of communication matrices.
//!
//! A communication matrix is an `N x N` row-stochastic matrix `A` whose
//! support defines a directed graph: agent `j` sends to agent `i` exactly
//! when `a_ij > 0`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row sums must match 1 within this tolerance; also used for the
/// bistochasticity and symmetry checks.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix dimension {n} is below the minimum {min} for this construction")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 1")]
    RowSumNotOne { row: usize, sum: f64 },
    #[error("alpha must be > 1, got {alpha}")]
    InvalidAlpha { alpha: f64 },
    #[error("node {node} has no in-neighbor")]
    IsolatedNode { node: usize },
}

/// The named communication matrices used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// `I_N`: no communication.
    Identity,
    /// `(1/N) 11^T`: full (saturated) communication.
    Full,
    /// Tridiagonal matrix with 1/2 entries and self-loops at both ends.
    TridiagA1,
    /// Tridiagonal matrix with 1/3 entries; satisfies `3 A2 = 2 A1 + I`.
    TridiagA2,
    /// Star-shaped matrix where node 1 talks to everyone.
    StarA3,
}

/// A validated `N x N` row-stochastic matrix.
///
/// Immutable after construction: every row sums to 1 within
/// [`STOCHASTIC_TOL`], all entries are nonnegative, and `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    entries: Array2<f64>,
}

impl StochasticMatrix {
    /// Validates and wraps a dense matrix.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self, MatrixError> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(MatrixError::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(MatrixError::DimensionTooSmall { n: rows, min: 2 });
        }
        for (i, row) in entries.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(MatrixError::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(MatrixError::RowSumNotOne { row: i, sum });
            }
        }
        Ok(Self { n: rows, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Entry `a_ij`: the weight agent `i` puts on the value sent by `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Support digraph: edge `(j, i)` whenever `a_ij > 0`.
    pub fn support(&self) -> CommGraph {
        let in_neighbors = self
            .entries
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        CommGraph::from_in_neighbors(in_neighbors)
    }

    /// Entry symmetry within [`STOCHASTIC_TOL`].
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.entries[(i, j)] - self.entries[(j, i)]).abs() > STOCHASTIC_TOL {
                    return false;
                }
            }
        }
        true
    }
}

/// Builds one of the named matrices at size `n`.
pub fn build_named(kind: MatrixKind, n: usize) -> Result<StochasticMatrix, MatrixError> {
    let min = match kind {
        MatrixKind::TridiagA1 | MatrixKind::TridiagA2 => 3,
        _ => 2,
    };
    if n < min {
        return Err(MatrixError::DimensionTooSmall { n, min });
    }
    let mut m = Array2::zeros((n, n));
    match kind {
        MatrixKind::Identity => {
            for i in 0..n {
                m[(i, i)] = 1.0;
            }
        }
        MatrixKind::Full => {
            m.fill(1.0 / n as f64);
        }
        MatrixKind::TridiagA1 => {
            // Reflecting walk: 1/2 on the off-diagonals, 1/2 self-loops at
            // both ends.
            m[(0, 0)] = 0.5;
            m[(0, 1)] = 0.5;
            m[(n - 1, n - 1)] = 0.5;
            m[(n - 1, n - 2)] = 0.5;
            for i in 1..n - 1 {
                m[(i, i - 1)] = 0.5;
                m[(i, i + 1)] = 0.5;
            }
        }
        MatrixKind::TridiagA2 => {
            let third = 1.0 / 3.0;
            m[(0, 0)] = 2.0 * third;
            m[(0, 1)] = third;
            m[(n - 1, n - 1)] = 2.0 * third;
            m[(n - 1, n - 2)] = third;
            for i in 1..n - 1 {
                m[(i, i - 1)] = third;
                m[(i, i)] = third;
                m[(i, i + 1)] = third;
            }
        }
        MatrixKind::StarA3 => {
            let inv = 1.0 / n as f64;
            for j in 0..n {
                m[(0, j)] = inv;
            }
            for i in 1..n {
                m[(i, 0)] = inv;
                m[(i, i)] = (n - 1) as f64 * inv;
            }
        }
    }
    StochasticMatrix::from_entries(m)
}

/// The 2x2 matrix with both rows `(1/alpha, (alpha-1)/alpha)`.
///
/// Both rows are equal, so the matrix is rank one and its stationary
/// distribution is the common row.
pub fn build_h_alpha(alpha: f64) -> Result<StochasticMatrix, MatrixError> {
    if alpha <= 1.0 || alpha.is_nan() {
        return Err(MatrixError::InvalidAlpha { alpha });
    }
    let p = 1.0 / alpha;
    let q = (alpha - 1.0) / alpha;
    let m = ndarray::arr2(&[[p, q], [p, q]]);
    StochasticMatrix::from_entries(m)
}

/// Equal neighbor model: `a_ij = 1/|N(i)|` for every in-neighbor `j` of `i`.
pub fn build_equal_neighbor(graph: &CommGraph) -> Result<StochasticMatrix, MatrixError> {
    let n = graph.n();
    if n < 2 {
        return Err(MatrixError::DimensionTooSmall { n, min: 2 });
    }
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        let neighbors = graph.in_neighbors(i);
        if neighbors.is_empty() {
            return Err(MatrixError::IsolatedNode { node: i });
        }
        let w = 1.0 / neighbors.len() as f64;
        for &j in neighbors {
            m[(i, j)] = w;
        }
    }
    StochasticMatrix::from_entries(m)
}

/// Directed communication graph on `n` nodes.
///
/// Edge `(j, i)` means `j` sends to `i`; stored as per-node in-neighbor
/// lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    n: usize,
    in_neighbors: Vec<Vec<usize>>,
    undirected: bool,
}

impl CommGraph {
    /// Builds a graph from directed edges `(j, i)`. Duplicates are merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut in_neighbors = vec![Vec::new(); n];
        for &(j, i) in edges {
            assert!(j < n && i < n, "edge ({j}, {i}) out of range for n = {n}");
            in_neighbors[i].push(j);
        }
        Self::from_in_neighbors(in_neighbors)
    }

    fn from_in_neighbors(mut in_neighbors: Vec<Vec<usize>>) -> Self {
        let n = in_neighbors.len();
        for list in &mut in_neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let undirected = (0..n).all(|i| {
            in_neighbors[i]
                .iter()
                .all(|&j| in_neighbors[j].binary_search(&i).is_ok())
        });
        Self {
            n,
            in_neighbors,
            undirected,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodes that send to `i`.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_neighbors[i]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.in_neighbors[to].binary_search(&from).is_ok()
    }

    /// True when the edge set is symmetric.
    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn edge_count(&self) -> usize {
        self.in_neighbors.iter().map(Vec::len).sum()
    }

    fn out_neighbors_lists(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (i, list) in self.in_neighbors.iter().enumerate() {
            for &j in list {
                out[j].push(i);
            }
        }
        out
    }
}

/// Graph-theoretic summary of a communication matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDiagnostics {
    /// Support digraph strongly connected.
    pub irreducible: bool,
    /// Gcd of cycle lengths through any node; `None` when reducible.
    pub period: Option<usize>,
    /// Columns also sum to 1 within tolerance.
    pub bistochastic: bool,
    /// Entrywise symmetry of the matrix values.
    pub symmetric: bool,
    /// Communication-complexity index: maximal indegree of the support
    /// graph, with self-loops counted twice when the support is undirected.
    pub complexity_index: usize,
}

impl GraphDiagnostics {
    /// Irreducible with period 1.
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.period == Some(1)
    }
}

/// Computes the full diagnostics of a communication matrix.
pub fn diagnostics(a: &StochasticMatrix) -> GraphDiagnostics {
    let n = a.n();
    let support = a.support();
    let out = support.out_neighbors_lists();

    let irreducible = reaches_all(&out, 0) && reaches_all(&support.in_neighbors, 0);
    let period = if irreducible {
        Some(graph_period(&out))
    } else {
        None
    };

    let mut bistochastic = true;
    for j in 0..n {
        let col_sum: f64 = (0..n).map(|i| a.get(i, j)).sum();
        if (col_sum - 1.0).abs() > STOCHASTIC_TOL {
            bistochastic = false;
            break;
        }
    }

    let mut complexity_index = 0;
    for i in 0..n {
        let mut indegree = support.in_neighbors(i).len();
        if support.is_undirected() && support.has_edge(i, i) {
            indegree += 1;
        }
        complexity_index = complexity_index.max(indegree);
    }

    GraphDiagnostics {
        irreducible,
        period,
        bistochastic,
        symmetric: a.is_symmetric(),
        complexity_index,
    }
}

/// BFS reachability of every node from `root`.
fn reaches_all(adj: &[Vec<usize>], root: usize) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[root] = true;
    queue.push_back(root);
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Period of a strongly connected digraph by BFS labeling: the gcd of
/// `level(u) + 1 - level(v)` over all edges `(u, v)`.
fn graph_period(out: &[Vec<usize>]) -> usize {
    let n = out.len();
    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0);
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &out[u] {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                let diff = level[u] as i64 + 1 - level[v] as i64;
                g = gcd(g, diff.unsigned_abs());
            }
        }
    }
    // Tree edges contribute difference 0; g stays 0 only if the graph is a
    // single node with no cycle, which cannot happen for a strongly
    // connected support of a stochastic matrix with n >= 2.
    g.max(1) as usize
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Squared Frobenius norm of `A^k`, with `A^0 = I`.
pub fn matrix_power_frobenius_sq(a: &StochasticMatrix, k: usize) -> f64 {
    let n = a.n();
    if k == 0 {
        return n as f64;
    }
    let mut power = a.entries().clone();
    for _ in 1..k {
        power = power.dot(a.entries());
    }
    power.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn a1_n3_matches_reference_rows() {
        let a = build_named(MatrixKind::TridiagA1, 3).unwrap();
        let expected = [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn identity_n4() {
        let a = build_named(MatrixKind::Identity, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn a2_satisfies_three_a2_eq_two_a1_plus_identity() {
        for n in [3, 5, 12, 31] {
            let a1 = build_named(MatrixKind::TridiagA1, n).unwrap();
            let a2 = build_named(MatrixKind::TridiagA2, n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let lhs = 3.0 * a2.get(i, j);
                    let rhs = 2.0 * a1.get(i, j) + if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn tridiag_needs_n_at_least_3() {
        assert!(matches!(
            build_named(MatrixKind::TridiagA1, 2),
            Err(MatrixError::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            build_named(MatrixKind::TridiagA2, 2),
            Err(MatrixError::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn h_alpha_values() {
        let h2 = build_h_alpha(2.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h2.get(i, j), 0.5);
            }
        }
        let h3 = build_h_alpha(3.0).unwrap();
        assert_abs_diff_eq!(h3.get(0, 0), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h3.get(0, 1), 2.0 / 3.0, epsilon = 1e-15);
        let h15 = build_h_alpha(1.5).unwrap();
        assert_abs_diff_eq!(h15.get(1, 0), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h15.get(1, 1), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn h_alpha_rejects_alpha_at_most_one() {
        assert!(matches!(
            build_h_alpha(1.0),
            Err(MatrixError::InvalidAlpha { .. })
        ));
        assert!(matches!(
            build_h_alpha(0.3),
            Err(MatrixError::InvalidAlpha { .. })
        ));
    }

    #[test]
    fn equal_neighbor_complete_with_self_loops() {
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                edges.push((j, i));
            }
        }
        let g = CommGraph::from_edges(3, &edges);
        let a = build_equal_neighbor(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.get(i, j), 1.0 / 3.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn equal_neighbor_path_with_self_loops() {
        // Path 0-1-2, bidirectional, all self-loops. Counted by hand:
        // node 0 and node 2 have two in-neighbors, node 1 has three.
        let edges = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1)];
        let g = CommGraph::from_edges(3, &edges);
        let a = build_equal_neighbor(&g).unwrap();
        let expected = [
            [0.5, 0.5, 0.0],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [0.0, 0.5, 0.5],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.get(i, j), expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn equal_neighbor_on_a1_support_recovers_a1() {
        let a1 = build_named(MatrixKind::TridiagA1, 3).unwrap();
        let rebuilt = build_equal_neighbor(&a1.support()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(rebuilt.get(i, j), a1.get(i, j));
            }
        }
    }

    #[test]
    fn equal_neighbor_isolated_node_errors() {
        let g = CommGraph::from_edges(3, &[(0, 1), (1, 0), (1, 1), (0, 0)]);
        assert!(matches!(
            build_equal_neighbor(&g),
            Err(MatrixError::IsolatedNode { node: 2 })
        ));
    }

    #[test]
    fn diagnostics_a1_n10() {
        let a = build_named(MatrixKind::TridiagA1, 10).unwrap();
        let d = diagnostics(&a);
        assert!(d.irreducible);
        assert_eq!(d.period, Some(1));
        assert!(d.bistochastic);
        assert!(d.symmetric);
        assert_eq!(d.complexity_index, 3);
    }

    #[test]
    fn diagnostics_a2_n10() {
        let a = build_named(MatrixKind::TridiagA2, 10).unwrap();
        let d = diagnostics(&a);
        assert!(d.is_ergodic());
        assert_eq!(d.complexity_index, 4);
    }

    #[test]
    fn diagnostics_a3_complexity_is_n_plus_one() {
        let a = build_named(MatrixKind::StarA3, 10).unwrap();
        let d = diagnostics(&a);
        assert!(d.is_ergodic());
        assert!(d.bistochastic);
        assert_eq!(d.complexity_index, 11);
    }

    #[test]
    fn diagnostics_cycle_permutation() {
        // Single directed 3-cycle.
        let m = ndarray::arr2(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]);
        let a = StochasticMatrix::from_entries(m).unwrap();
        let d = diagnostics(&a);
        assert!(d.irreducible);
        assert_eq!(d.period, Some(3));
        assert!(d.bistochastic);
        assert!(!d.symmetric);
    }

    #[test]
    fn permutation_cycle_period_equals_n() {
        for n in 2..=9 {
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                m[(i, (i + 1) % n)] = 1.0;
            }
            let a = StochasticMatrix::from_entries(m).unwrap();
            assert_eq!(diagnostics(&a).period, Some(n));
        }
    }

    #[test]
    fn identity_is_reducible_with_undefined_period() {
        let a = build_named(MatrixKind::Identity, 5).unwrap();
        let d = diagnostics(&a);
        assert!(!d.irreducible);
        assert_eq!(d.period, None);
        // Self-loop only, undirected support: each loop counts twice.
        assert_eq!(d.complexity_index, 2);
    }

    #[test]
    fn full_matrix_is_ergodic_and_bistochastic() {
        for n in [2, 5, 17] {
            let a = build_named(MatrixKind::Full, n).unwrap();
            let d = diagnostics(&a);
            assert!(d.is_ergodic());
            assert!(d.bistochastic);
            assert_eq!(d.complexity_index, n + 1);
        }
    }

    #[test]
    fn positive_diagonal_and_irreducible_implies_aperiodic() {
        let a = build_named(MatrixKind::TridiagA2, 7).unwrap();
        assert_eq!(diagnostics(&a).period, Some(1));
        let a3 = build_named(MatrixKind::StarA3, 6).unwrap();
        assert_eq!(diagnostics(&a3).period, Some(1));
    }

    #[test]
    fn frobenius_of_zeroth_power_is_n() {
        let a = build_named(MatrixKind::TridiagA1, 6).unwrap();
        assert_eq!(matrix_power_frobenius_sq(&a, 0), 6.0);
    }

    #[test]
    fn frobenius_of_identity_powers_is_n() {
        let a = build_named(MatrixKind::Identity, 9).unwrap();
        for k in 0..5 {
            assert_eq!(matrix_power_frobenius_sq(&a, k), 9.0);
        }
    }

    #[test]
    fn frobenius_of_full_matrix_is_one() {
        let a = build_named(MatrixKind::Full, 8).unwrap();
        assert_abs_diff_eq!(matrix_power_frobenius_sq(&a, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(matrix_power_frobenius_sq(&a, 3), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn frobenius_bounds_hold_for_assorted_matrices() {
        // 1 <= |A^k|^2 <= N for any stochastic A.
        let cases = vec![
            build_named(MatrixKind::TridiagA1, 7).unwrap(),
            build_named(MatrixKind::StarA3, 5).unwrap(),
            build_h_alpha(4.2).unwrap(),
        ];
        for a in cases {
            for k in 0..8 {
                let f = matrix_power_frobenius_sq(&a, k);
                assert!(f >= 1.0 - 1e-12 && f <= a.n() as f64 + 1e-12, "k={k} f={f}");
            }
        }
    }

    #[test]
    fn rejects_invalid_matrices() {
        let bad_sum = ndarray::arr2(&[[0.6, 0.6], [0.5, 0.5]]);
        assert!(matches!(
            StochasticMatrix::from_entries(bad_sum),
            Err(MatrixError::RowSumNotOne { row: 0, .. })
        ));
        let negative = ndarray::arr2(&[[1.5, -0.5], [0.5, 0.5]]);
        assert!(matches!(
            StochasticMatrix::from_entries(negative),
            Err(MatrixError::NegativeEntry { .. })
        ));
        let tiny = ndarray::arr2(&[[1.0]]);
        assert!(matches!(
            StochasticMatrix::from_entries(tiny),
            Err(MatrixError::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn equal_neighbor_symmetric_graph_is_bistochastic_when_symmetric() {
        // Symmetric regular-ish graph: 4-cycle with self-loops gives a
        // symmetric matrix, which must then be bistochastic.
        let mut edges = Vec::new();
        for i in 0..4usize {
            edges.push((i, i));
            edges.push((i, (i + 1) % 4));
            edges.push(((i + 1) % 4, i));
        }
        let g = CommGraph::from_edges(4, &edges);
        let a = build_equal_neighbor(&g).unwrap();
        let d = diagnostics(&a);
        assert!(d.symmetric);
        assert!(d.bistochastic);
    }
}
