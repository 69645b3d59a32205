//! Statistical-efficiency versus communication-complexity studies on
//! Ramanujan communication matrices.
//!
//! Two experiments: a penalized sweep selecting the degree `d*` that
//! minimizes `S(A_d) + beta * C(A_d)` for a cost weight `beta`, and a
//! fixed-data-budget study that, for each network size `n`, finds the
//! smallest degree whose performance ratio clears a threshold once all
//! `T` samples have been streamed (`t = T / n` per node).

use crate::ramanujan::{self, GraphGenError};
use crate::seeds;
use crate::spectral;
use rayon::prelude::*;
use serde::Serialize;

/// Graph samples per cell before giving up.
const MAX_ATTEMPTS: usize = 100;

/// One row of a penalized sweep: a degree, its spectral coefficient, and
/// the penalized objective for one cost weight.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffRecord {
    pub n: usize,
    pub d: usize,
    /// `S(A_d)` of the sampled Ramanujan matrix.
    pub s_coeff: f64,
    /// Communication-complexity index; equals `d` for a `d`-regular graph.
    pub c_index: usize,
    pub beta: f64,
    /// `s_coeff + beta * c_index`.
    pub penalized: f64,
    /// Seed the cell's graph was drawn from.
    pub seed: u64,
}

/// Why a requested degree produced no record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// `n * d` is odd; no `d`-regular graph exists.
    OddParity,
    /// Degree outside `3..n`.
    InfeasibleDegree,
    /// The sampler gave up before finding an ergodic Ramanujan graph.
    GenerationTimeout,
}

/// Complete output of a penalized sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PenalizedSweep {
    pub records: Vec<TradeoffRecord>,
    pub skipped: Vec<(usize, SkipReason)>,
}

impl PenalizedSweep {
    /// Degree minimizing the penalized objective for `beta`; ties break
    /// toward the smaller (cheaper) degree.
    pub fn d_star(&self, beta: f64) -> Option<usize> {
        self.records
            .iter()
            .filter(|r| r.beta == beta)
            .min_by(|a, b| {
                (a.penalized, a.d)
                    .partial_cmp(&(b.penalized, b.d))
                    .expect("finite objectives")
            })
            .map(|r| r.d)
    }
}

/// Sweeps degrees, sampling one Ramanujan matrix per degree, and records
/// the penalized objective for every `beta`.
pub fn penalized_sweep(n: usize, d_range: &[usize], betas: &[f64], seed: u64) -> PenalizedSweep {
    penalized_sweep_averaged(n, d_range, betas, seed, 1)
}

/// [`penalized_sweep`] with `S(A_d)` averaged over `repeats` independent
/// samples per degree.
pub fn penalized_sweep_averaged(
    n: usize,
    d_range: &[usize],
    betas: &[f64],
    seed: u64,
    repeats: usize,
) -> PenalizedSweep {
    assert!(repeats >= 1);
    let cells: Vec<(usize, Result<f64, SkipReason>)> = d_range
        .par_iter()
        .map(|&d| (d, average_s(n, d, seed, repeats)))
        .collect();

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (d, outcome) in cells {
        match outcome {
            Ok(s_coeff) => {
                for &beta in betas {
                    records.push(TradeoffRecord {
                        n,
                        d,
                        s_coeff,
                        c_index: d,
                        beta,
                        penalized: s_coeff + beta * d as f64,
                        seed: seeds::derive(seed, &[n as u64, d as u64]),
                    });
                }
            }
            Err(reason) => skipped.push((d, reason)),
        }
    }
    PenalizedSweep { records, skipped }
}

fn average_s(n: usize, d: usize, seed: u64, repeats: usize) -> Result<f64, SkipReason> {
    if d < 3 || d >= n {
        return Err(SkipReason::InfeasibleDegree);
    }
    if !(n * d).is_multiple_of(2) {
        return Err(SkipReason::OddParity);
    }
    let mut total = 0.0;
    for rep in 0..repeats {
        let cell_seed = if rep == 0 {
            seeds::derive(seed, &[n as u64, d as u64])
        } else {
            seeds::derive(seed, &[n as u64, d as u64, rep as u64])
        };
        match ramanujan::generate_with_details(n, d, cell_seed, MAX_ATTEMPTS) {
            Ok(generated) => total += generated.spectrum.s_coefficient(),
            Err(GraphGenError::GenerationTimeout { .. }) => {
                return Err(SkipReason::GenerationTimeout)
            }
            Err(_) => return Err(SkipReason::InfeasibleDegree),
        }
    }
    Ok(total / repeats as f64)
}

/// One row of the fixed-budget study.
#[derive(Debug, Clone, Serialize)]
pub struct BudgetRecord {
    pub total_data: u64,
    pub n: usize,
    /// `floor(total_data / n)` samples per node.
    pub t_per_node: u64,
    /// Smallest degree whose sampled matrix clears the threshold, if any.
    pub d_star: Option<usize>,
    /// `d_star / n`.
    pub cost_ratio: Option<f64>,
    pub seed: u64,
}

/// Default cap on the degree scan; the ratio saturates long before this.
pub const DEFAULT_D_CAP: usize = 64;

/// For each `n`, the smallest `d` whose Ramanujan matrix reaches
/// `tau_{T/n}(A_d) >= threshold`.
pub fn budget_analysis(
    total_data: u64,
    n_grid: &[usize],
    threshold: f64,
    seed: u64,
) -> Vec<BudgetRecord> {
    budget_analysis_with_cap(total_data, n_grid, threshold, seed, DEFAULT_D_CAP)
}

/// [`budget_analysis`] with an explicit cap on the scanned degree.
pub fn budget_analysis_with_cap(
    total_data: u64,
    n_grid: &[usize],
    threshold: f64,
    seed: u64,
    d_cap: usize,
) -> Vec<BudgetRecord> {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "threshold must lie in (0, 1)"
    );
    assert!(
        n_grid.iter().all(|&n| total_data / n as u64 >= 1),
        "t per node must be >= 1"
    );
    n_grid
        .par_iter()
        .map(|&n| budget_cell(total_data, n, threshold, seed, d_cap))
        .collect()
}

fn budget_cell(total_data: u64, n: usize, threshold: f64, seed: u64, d_cap: usize) -> BudgetRecord {
    let t = total_data / n as u64;
    let mut record = BudgetRecord {
        total_data,
        n,
        t_per_node: t,
        d_star: None,
        cost_ratio: None,
        seed: seeds::derive(seed, &[n as u64]),
    };
    // No spectrum can beat tau = t / (t + N - 1); if even that misses the
    // threshold, every degree is infeasible.
    let tf = t as f64;
    if tf / (tf + (n as f64 - 1.0)) < threshold {
        return record;
    }
    for d in 3..=d_cap.min(n - 1) {
        if !(n * d).is_multiple_of(2) {
            continue;
        }
        if regular_tau_upper_bound(n, d, t) < threshold {
            // Provably infeasible for every simple d-regular graph.
            continue;
        }
        let cell_seed = seeds::derive(seed, &[n as u64, d as u64]);
        match ramanujan::generate_with_details(n, d, cell_seed, MAX_ATTEMPTS) {
            Ok(generated) => {
                let tau = spectral::tau_closed_form(&generated.spectrum, t);
                if tau >= threshold {
                    record.d_star = Some(d);
                    record.cost_ratio = Some(d as f64 / n as f64);
                    break;
                }
            }
            Err(_) => continue,
        }
    }
    record
}

/// Largest performance ratio any simple `d`-regular matrix on `n` nodes can
/// reach at time `t`.
///
/// `Tr A^2 = n/d` pins the mean squared non-unit eigenvalue at
/// `s_bar = (n/d - 1)/(n - 1)`, and Jensen's inequality on the convex map
/// `s -> (1 - s^t)/(1 - s)` bounds the spectral sum from below, hence the
/// ratio from above. Used only to prune the degree scan; never to accept.
fn regular_tau_upper_bound(n: usize, d: usize, t: u64) -> f64 {
    let nf = n as f64;
    let tf = t as f64;
    let s_bar = (nf / d as f64 - 1.0) / (nf - 1.0);
    let geom = (1.0 - s_bar.powf(tf)) / (1.0 - s_bar);
    let spectral_sum = (nf - 1.0) * geom;
    1.0 / (1.0 + spectral_sum / tf)
}

/// The record minimizing the cost ratio; ties break toward smaller `n`.
pub fn recommend(records: &[BudgetRecord]) -> Option<&BudgetRecord> {
    records
        .iter()
        .filter(|r| r.cost_ratio.is_some())
        .min_by(|a, b| {
            let ka = (a.cost_ratio.expect("filtered"), a.n);
            let kb = (b.cost_ratio.expect("filtered"), b.n);
            ka.partial_cmp(&kb).expect("finite ratios")
        })
}
