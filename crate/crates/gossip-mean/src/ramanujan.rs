//! Random regular graphs, the Ramanujan spectral test, and generation of
//! Ramanujan communication matrices `A = G/d`.
//!
//! A `d`-regular graph is Ramanujan when every adjacency eigenvalue other
//! than the trivial ones satisfies `|mu| <= 2 sqrt(d - 1)`; such graphs are
//! spectrally optimal expanders, and most random regular graphs pass the
//! test. Sampling uses the pairing (configuration) model with local repair
//! of conflicting pairs and bounded full restarts.

use crate::matrix::{diagnostics, StochasticMatrix};
use crate::seeds;
use crate::spectral::{self, SpectrumReport};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

/// Slack added to the spectral threshold comparison to absorb floating
/// point error on the boundary.
pub const SPECTRAL_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphGenError {
    #[error("infeasible parameters (n = {n}, d = {d}): {reason}")]
    InfeasibleParameters {
        n: usize,
        d: usize,
        reason: &'static str,
    },
    #[error("generation timed out after {attempts} attempts")]
    GenerationTimeout { attempts: usize },
    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(&'static str),
}

/// Simple undirected `d`-regular graph: symmetric 0/1 adjacency, zero
/// diagonal, every vertex of degree exactly `d`.
#[derive(Debug, Clone)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    adjacency: Array2<u8>,
}

impl RegularGraph {
    /// Validates an adjacency matrix; the degree is inferred from the rows.
    pub fn from_adjacency(adjacency: Array2<u8>) -> Result<Self, GraphGenError> {
        let (rows, cols) = adjacency.dim();
        if rows != cols || rows < 2 {
            return Err(GraphGenError::InvalidAdjacency(
                "must be square with n >= 2",
            ));
        }
        let n = rows;
        for i in 0..n {
            if adjacency[(i, i)] != 0 {
                return Err(GraphGenError::InvalidAdjacency("self-loop on the diagonal"));
            }
            for j in 0..n {
                if adjacency[(i, j)] > 1 {
                    return Err(GraphGenError::InvalidAdjacency("entries must be 0 or 1"));
                }
                if adjacency[(i, j)] != adjacency[(j, i)] {
                    return Err(GraphGenError::InvalidAdjacency("must be symmetric"));
                }
            }
        }
        let d = (0..n).map(|j| adjacency[(0, j)] as usize).sum();
        if d == 0 {
            return Err(GraphGenError::InvalidAdjacency("degree must be positive"));
        }
        for i in 1..n {
            let deg: usize = (0..n).map(|j| adjacency[(i, j)] as usize).sum();
            if deg != d {
                return Err(GraphGenError::InvalidAdjacency("degrees are not all equal"));
            }
        }
        Ok(Self { n, d, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn adjacency(&self) -> &Array2<u8> {
        &self.adjacency
    }

    /// Undirected edges as pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.n * self.d / 2);
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.adjacency[(u, v)] == 1 {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    /// The natural bistochastic communication matrix `A = G / d`.
    pub fn to_comm_matrix(&self) -> StochasticMatrix {
        let inv = 1.0 / self.d as f64;
        let entries = self.adjacency.mapv(|v| v as f64 * inv);
        StochasticMatrix::from_entries(entries).expect("regular graph rows sum to d")
    }
}

/// Outcome of the Ramanujan spectral test.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RamanujanVerdict {
    /// `max(|mu_l| : mu_l < d) <= 2 sqrt(d-1)` up to [`SPECTRAL_SLACK`].
    pub is_ramanujan: bool,
    /// Second largest adjacency eigenvalue.
    pub mu2: f64,
    /// Smallest adjacency eigenvalue.
    pub mu_n: f64,
    /// `2 sqrt(d - 1)`.
    pub threshold: f64,
}

/// Spectral test on the adjacency eigenvalues of a regular graph.
pub fn ramanujan_verdict(g: &RegularGraph) -> RamanujanVerdict {
    let dense = g.adjacency.mapv(|v| v as f64);
    let ascending =
        spectral::raw_symmetric_eigenvalues(&dense).expect("adjacency spectra converge");
    verdict_from_adjacency_spectrum(&ascending, g.d)
}

/// `ascending` holds all adjacency eigenvalues in ascending order.
fn verdict_from_adjacency_spectrum(ascending: &[f64], d: usize) -> RamanujanVerdict {
    let n = ascending.len();
    let df = d as f64;
    let threshold = 2.0 * (df - 1.0).sqrt();
    // Eigenvalues numerically equal to d are the trivial ones (one copy per
    // connected component); everything strictly below d is tested.
    let max_nontrivial = ascending
        .iter()
        .filter(|&&mu| mu < df - SPECTRAL_SLACK)
        .map(|mu| mu.abs())
        .fold(0.0, f64::max);
    RamanujanVerdict {
        is_ramanujan: max_nontrivial <= threshold + SPECTRAL_SLACK,
        mu2: ascending[n - 2],
        mu_n: ascending[0],
        threshold,
    }
}

/// Samples a simple `d`-regular graph on `n` vertices by the pairing model.
///
/// Each vertex owns `d` points; a uniform perfect matching on the points
/// projects to a multigraph. Conflicting pairs (self-loops, duplicate
/// edges) are locally resampled against randomly chosen partner pairs; if
/// repair stalls, the matching is redrawn from scratch, a bounded number of
/// times. For `d` beyond `(n-1)/2` the complement graph is sampled instead,
/// which maps the dense case back to the sparse one.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<RegularGraph, GraphGenError> {
    check_feasible(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adjacency = sample_simple_adjacency(n, d, &mut rng)?;
    RegularGraph::from_adjacency(adjacency)
}

fn check_feasible(n: usize, d: usize) -> Result<(), GraphGenError> {
    if d < 3 {
        return Err(GraphGenError::InfeasibleParameters {
            n,
            d,
            reason: "degree must be >= 3",
        });
    }
    if d >= n {
        return Err(GraphGenError::InfeasibleParameters {
            n,
            d,
            reason: "degree must be < n",
        });
    }
    if !(n * d).is_multiple_of(2) {
        return Err(GraphGenError::InfeasibleParameters {
            n,
            d,
            reason: "n * d must be even",
        });
    }
    Ok(())
}

fn sample_simple_adjacency(
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<u8>, GraphGenError> {
    let complement_degree = n - 1 - d;
    if complement_degree < d {
        let mut adjacency = sample_by_pairing(n, complement_degree, rng)?;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    adjacency[(i, j)] = 1 - adjacency[(i, j)];
                }
            }
        }
        Ok(adjacency)
    } else {
        sample_by_pairing(n, d, rng)
    }
}

const FULL_RESTARTS: usize = 200;

fn sample_by_pairing(
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<u8>, GraphGenError> {
    if d == 0 {
        return Ok(Array2::zeros((n, n)));
    }
    let repair_budget = 400 * (n * d + 64);
    for _ in 0..FULL_RESTARTS {
        if let Some(adjacency) = pairing_attempt(n, d, repair_budget, rng) {
            return Ok(adjacency);
        }
    }
    Err(GraphGenError::GenerationTimeout {
        attempts: FULL_RESTARTS,
    })
}

/// One matching draw plus local repair. Returns `None` when the repair
/// budget is exhausted.
fn pairing_attempt(
    n: usize,
    d: usize,
    repair_budget: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Array2<u8>> {
    let total = n * d;
    let bucket = |p: usize| p / d;

    let mut points: Vec<usize> = (0..total).collect();
    points.shuffle(rng);
    // pairs[k] = (p, q); pair_index[p] = k.
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(total / 2);
    let mut pair_index = vec![0usize; total];
    for k in 0..total / 2 {
        let (p, q) = (points[2 * k], points[2 * k + 1]);
        pairs.push((p, q));
        pair_index[p] = k;
        pair_index[q] = k;
    }

    let mut multiplicity: HashMap<(usize, usize), usize> = HashMap::with_capacity(total);
    let edge_of = |&(p, q): &(usize, usize)| {
        let (u, v) = (bucket(p), bucket(q));
        (u.min(v), u.max(v))
    };
    for pair in &pairs {
        *multiplicity.entry(edge_of(pair)).or_insert(0) += 1;
    }
    let conflicted = |pair: &(usize, usize), mult: &HashMap<(usize, usize), usize>| {
        let (u, v) = edge_of(pair);
        u == v || mult[&(u, v)] > 1
    };

    let mut queue: Vec<usize> = (0..pairs.len())
        .filter(|&k| conflicted(&pairs[k], &multiplicity))
        .collect();
    let mut attempts = 0;
    while let Some(&k) = queue.last() {
        if !conflicted(&pairs[k], &multiplicity) {
            queue.pop();
            continue;
        }
        attempts += 1;
        if attempts > repair_budget {
            return None;
        }
        // Rewire the conflicting pair against a random partner pair.
        let other = rng.random_range(0..pairs.len());
        if other == k {
            continue;
        }
        let (p, q) = pairs[k];
        let (r, s) = pairs[other];
        let (new_a, new_b) = if rng.random_bool(0.5) {
            ((p, r), (q, s))
        } else {
            ((p, s), (q, r))
        };
        let (ea, eb) = (edge_of(&new_a), edge_of(&new_b));
        if ea.0 == ea.1 || eb.0 == eb.1 {
            continue;
        }
        let old_k = edge_of(&pairs[k]);
        let old_other = edge_of(&pairs[other]);
        *multiplicity.get_mut(&old_k).expect("tracked edge") -= 1;
        *multiplicity.get_mut(&old_other).expect("tracked edge") -= 1;
        let ma = *multiplicity.entry(ea).and_modify(|m| *m += 1).or_insert(1);
        let mb = *multiplicity.entry(eb).and_modify(|m| *m += 1).or_insert(1);
        if (ma > 1 && ea != eb) || mb > 1 || (ea == eb && ma > 2) {
            // Reject switches that merely move the conflict around unless
            // they at least keep the books consistent; roll back.
            *multiplicity.get_mut(&ea).expect("just inserted") -= 1;
            *multiplicity.get_mut(&eb).expect("just inserted") -= 1;
            *multiplicity.get_mut(&old_k).expect("tracked edge") += 1;
            *multiplicity.get_mut(&old_other).expect("tracked edge") += 1;
            continue;
        }
        pairs[k] = new_a;
        pairs[other] = new_b;
        let ((a0, a1), (b0, b1)) = (new_a, new_b);
        pair_index[a0] = k;
        pair_index[a1] = k;
        pair_index[b0] = other;
        pair_index[b1] = other;
        queue.pop();
        if conflicted(&pairs[other], &multiplicity) {
            queue.push(other);
        }
        if conflicted(&pairs[k], &multiplicity) {
            queue.push(k);
        }
    }

    let mut adjacency = Array2::zeros((n, n));
    for pair in &pairs {
        let (u, v) = edge_of(pair);
        adjacency[(u, v)] = 1;
        adjacency[(v, u)] = 1;
    }
    Some(adjacency)
}

/// A generated communication matrix together with everything the rejection
/// loop already computed about it.
#[derive(Debug, Clone)]
pub struct GeneratedMatrix {
    pub matrix: StochasticMatrix,
    pub graph: RegularGraph,
    pub verdict: RamanujanVerdict,
    pub spectrum: SpectrumReport,
    /// Graphs sampled until one passed all tests.
    pub attempts: usize,
}

/// Samples `d`-regular graphs until one is irreducible, aperiodic and
/// Ramanujan, and returns `A = G/d` with its spectrum.
///
/// Bipartite samples have adjacency eigenvalue `-d`, which makes `A`
/// periodic; the rejection loop discards them along with non-Ramanujan
/// draws.
pub fn generate_with_details(
    n: usize,
    d: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<GeneratedMatrix, GraphGenError> {
    check_feasible(n, d)?;
    for attempt in 0..max_attempts {
        let graph = random_regular_graph(n, d, seeds::derive(seed, &[attempt as u64]))?;
        let matrix = graph.to_comm_matrix();
        let diag = diagnostics(&matrix);
        if !diag.is_ergodic() {
            continue;
        }
        let mut ascending = spectral::raw_symmetric_eigenvalues(matrix.entries())
            .expect("symmetric eigensolve converges");
        let adjacency_ascending: Vec<f64> = ascending.iter().map(|g| g * d as f64).collect();
        let verdict = verdict_from_adjacency_spectrum(&adjacency_ascending, d);
        if !verdict.is_ramanujan {
            continue;
        }
        ascending.reverse();
        let spectrum = spectral::report_from_descending(ascending)
            .expect("ergodic Ramanujan matrices have a spectral gap");
        return Ok(GeneratedMatrix {
            matrix,
            graph,
            verdict,
            spectrum,
            attempts: attempt + 1,
        });
    }
    Err(GraphGenError::GenerationTimeout {
        attempts: max_attempts,
    })
}

/// [`generate_with_details`] returning only the communication matrix.
pub fn generate_comm_matrix(
    n: usize,
    d: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<StochasticMatrix, GraphGenError> {
    generate_with_details(n, d, seed, max_attempts).map(|g| g.matrix)
}
