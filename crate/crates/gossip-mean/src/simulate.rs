//! Monte Carlo simulation of the collaborative estimation recursion,
//! synchronous and with bounded communication delays.
//!
//! Each of `N` agents receives one fresh sample per time step and averages
//! its running estimate with (possibly delayed) estimates of its neighbors,
//! weighted by a stochastic matrix `A`. Both modes run through one engine
//! operating on the scaled estimates `Z_t = t * theta_hat_t`:
//!
//! `Z_{t+1}^(i) = sum_j a_ij Z_{t - B_ij}^(j) + X_{t+1}^(i)`, `Z_s = 0` for
//! `s <= 0`, `Z_1 = X_1`.
//!
//! With all delays zero this is exactly the synchronous recursion, so the
//! synchronous run is the degenerate case of the delayed one and the two
//! produce bitwise identical traces for equal seeds.
//!
//! Reproducibility contract: trial `r` draws from an independent ChaCha
//! stream `r` of the master seed, one sample per node per time step, nodes
//! in ascending order; trials are accumulated in fixed chunks in trial
//! order, so results do not depend on thread count.

use crate::matrix::StochasticMatrix;
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

/// Law of the samples streamed to the agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SourceKind {
    Uniform01,
    Gaussian { mean: f64, std_dev: f64 },
    Bernoulli { p: f64 },
}

/// A sampling law together with its exact mean, variance and boundedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceDistribution {
    pub kind: SourceKind,
    /// Analytic mean `theta`.
    pub theta: f64,
    /// Analytic variance `sigma^2`.
    pub sigma_sq: f64,
    /// Bounded support; required by the delayed-mode consistency theorem.
    pub bounded: bool,
}

impl SourceDistribution {
    pub fn uniform01() -> Self {
        Self {
            kind: SourceKind::Uniform01,
            theta: 0.5,
            sigma_sq: 1.0 / 12.0,
            bounded: true,
        }
    }

    pub fn gaussian(mean: f64, std_dev: f64) -> Self {
        assert!(std_dev > 0.0, "standard deviation must be positive");
        Self {
            kind: SourceKind::Gaussian { mean, std_dev },
            theta: mean,
            sigma_sq: std_dev * std_dev,
            bounded: false,
        }
    }

    pub fn bernoulli(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
        Self {
            kind: SourceKind::Bernoulli { p },
            theta: p,
            sigma_sq: p * (1.0 - p),
            bounded: true,
        }
    }
}

enum Sampler {
    Uniform01,
    Gaussian(Normal<f64>),
    Bernoulli(Bernoulli),
}

impl Sampler {
    fn new(dist: &SourceDistribution) -> Self {
        match dist.kind {
            SourceKind::Uniform01 => Sampler::Uniform01,
            SourceKind::Gaussian { mean, std_dev } => {
                Sampler::Gaussian(Normal::new(mean, std_dev).expect("validated parameters"))
            }
            SourceKind::Bernoulli { p } => {
                Sampler::Bernoulli(Bernoulli::new(p).expect("validated parameters"))
            }
        }
    }

    #[inline]
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Uniform01 => rng.random::<f64>(),
            Sampler::Gaussian(normal) => normal.sample(rng),
            Sampler::Bernoulli(bern) => f64::from(bern.sample(rng)),
        }
    }
}

/// Fixed integer delays `B_ij` in `{0..b_max}` applied on the support of
/// the communication matrix: at time `t` agent `i` uses the value of agent
/// `j` from time `t - B_ij`.
#[derive(Debug, Clone)]
pub struct DelaySchedule {
    n: usize,
    b_max: u32,
    delays: Array2<u32>,
}

impl DelaySchedule {
    /// No delays: the synchronous model.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            b_max: 0,
            delays: Array2::zeros((n, n)),
        }
    }

    /// The same delay `b` on every link.
    pub fn constant(n: usize, b: u32) -> Self {
        Self {
            n,
            b_max: b,
            delays: Array2::from_elem((n, n), b),
        }
    }

    /// Random but fixed delays, uniform on `{0..b_max}` over the support of
    /// `a` (zero elsewhere).
    pub fn random_on_support(a: &StochasticMatrix, b_max: u32, seed: u64) -> Self {
        let n = a.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut delays = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if a.get(i, j) > 0.0 {
                    delays[(i, j)] = rng.random_range(0..=b_max);
                }
            }
        }
        Self { n, b_max, delays }
    }

    /// Wraps explicit delays; `b_max` is their maximum.
    pub fn from_delays(delays: Array2<u32>) -> Self {
        let n = delays.nrows();
        assert_eq!(n, delays.ncols(), "delay matrix must be square");
        let b_max = delays.iter().copied().max().unwrap_or(0);
        Self { n, b_max, delays }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b_max(&self) -> u32 {
        self.b_max
    }

    pub fn delay(&self, i: usize, j: usize) -> u32 {
        self.delays[(i, j)]
    }
}

/// Smallest path length after which every backward support path starting
/// at time `t` lands at or before time `b_max`.
///
/// `kappa(t)` is the effective sample count of the delayed recursion; the
/// consistency theorem rescales estimates by `t / kappa(t)`.
pub fn kappa(t: u64, a: &StochasticMatrix, delays: &DelaySchedule) -> u64 {
    KappaTable::build(a, delays, t).kappa(t)
}

/// Precomputed `kappa` over `t = 1..=t_max`.
///
/// Internally stores `g(l) = l + minPathDelay(l)`, where `minPathDelay(l)`
/// is the minimum total delay over all support paths of length `l`
/// (dynamic program over `l`); `g` is strictly increasing, and
/// `kappa(t)` is the smallest `l` with `g(l) >= t - b_max`.
#[derive(Debug, Clone)]
pub struct KappaTable {
    g: Vec<u64>,
    b_max: u64,
}

impl KappaTable {
    pub fn build(a: &StochasticMatrix, delays: &DelaySchedule, t_max: u64) -> Self {
        assert_eq!(a.n(), delays.n(), "delay schedule dimension mismatch");
        let n = a.n();
        // Transitions follow positive entries (u, v) of A with delay B_uv.
        let arcs: Vec<Vec<(usize, u64)>> = (0..n)
            .map(|v| {
                (0..n)
                    .filter(|&u| a.get(u, v) > 0.0)
                    .map(|u| (u, delays.delay(u, v) as u64))
                    .collect()
            })
            .collect();
        let b_max = delays.b_max() as u64;
        let target = t_max.saturating_sub(b_max);
        let mut g = vec![0u64];
        let mut best = vec![0u64; n];
        let mut next = vec![0u64; n];
        let mut len = 0u64;
        while *g.last().expect("nonempty") < target {
            len += 1;
            for v in 0..n {
                let mut m = u64::MAX;
                for &(u, b) in &arcs[v] {
                    if best[u] != u64::MAX {
                        m = m.min(best[u] + b);
                    }
                }
                next[v] = m;
            }
            std::mem::swap(&mut best, &mut next);
            let min_delay = *best.iter().min().expect("n >= 2");
            g.push(len + min_delay);
        }
        Self { g, b_max }
    }

    /// `kappa(t)`; zero when `t <= b_max`.
    pub fn kappa(&self, t: u64) -> u64 {
        let target = t.saturating_sub(self.b_max);
        debug_assert!(
            *self.g.last().expect("nonempty") >= target,
            "table built too short"
        );
        self.g.partition_point(|&v| v < target) as u64
    }
}

/// Empirical traces of a Monte Carlo run, averaged over trials and recorded
/// on a grid of time points.
///
/// For the delayed mode every estimate is rescaled by `t / kappa(t)` before
/// the error is taken (for `kappa(t) = 0`, i.e. `t <= b_max`, the raw
/// estimate is recorded); the synchronous mode has `kappa(t) = t` and the
/// factor is exactly 1.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationTrace {
    pub t_grid: Vec<u64>,
    /// Per grid point, per node: mean (rescaled) estimate across trials.
    pub node_mean: Vec<Vec<f64>>,
    /// Per grid point, per node: empirical squared error.
    pub node_mse: Vec<Vec<f64>>,
    /// Per grid point: sum of `node_mse` over nodes.
    pub network_mse: Vec<f64>,
    /// Per grid point: analytic gold-standard numerator `sigma^2 / t`
    /// divided by `network_mse`.
    pub empirical_tau: Vec<f64>,
    /// Delta-method standard error of `empirical_tau` (NaN with one trial).
    pub tau_std_err: Vec<f64>,
    /// `kappa(t)` at each grid point.
    pub kappa: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
}

/// Geometrically spaced grid, about 50 points per decade, always including
/// 1 and `t_max`.
pub fn default_t_grid(t_max: u64) -> Vec<u64> {
    assert!(t_max >= 1);
    let mut grid = vec![1u64];
    let step = 10f64.powf(0.02);
    let mut x = 1.0f64;
    loop {
        x *= step;
        let t = x.round() as u64;
        if t >= t_max {
            break;
        }
        if t > *grid.last().expect("nonempty") {
            grid.push(t);
        }
    }
    if t_max > *grid.last().expect("nonempty") {
        grid.push(t_max);
    }
    grid
}

/// Synchronous run on the default grid up to `t_max`.
pub fn run_synchronous(
    a: &StochasticMatrix,
    dist: &SourceDistribution,
    t_max: u64,
    trials: u64,
    seed: u64,
) -> SimulationTrace {
    run_synchronous_on_grid(a, dist, &default_t_grid(t_max), trials, seed)
}

/// Synchronous run recorded at explicit grid points.
pub fn run_synchronous_on_grid(
    a: &StochasticMatrix,
    dist: &SourceDistribution,
    t_grid: &[u64],
    trials: u64,
    seed: u64,
) -> SimulationTrace {
    run_engine(a, dist, &DelaySchedule::zero(a.n()), t_grid, trials, seed)
}

/// Delayed (asynchronous) run on the default grid up to `t_max`; the source
/// must be bounded.
pub fn run_asynchronous(
    a: &StochasticMatrix,
    dist: &SourceDistribution,
    delays: &DelaySchedule,
    t_max: u64,
    trials: u64,
    seed: u64,
) -> SimulationTrace {
    run_asynchronous_on_grid(a, dist, delays, &default_t_grid(t_max), trials, seed)
}

/// Delayed run recorded at explicit grid points.
pub fn run_asynchronous_on_grid(
    a: &StochasticMatrix,
    dist: &SourceDistribution,
    delays: &DelaySchedule,
    t_grid: &[u64],
    trials: u64,
    seed: u64,
) -> SimulationTrace {
    assert!(dist.bounded, "the delayed model requires a bounded source");
    run_engine(a, dist, delays, t_grid, trials, seed)
}

const TRIAL_CHUNK: u64 = 64;

struct Accumulator {
    /// Grid-major, node-minor sums of rescaled estimates.
    sum_est: Vec<f64>,
    /// Grid-major, node-minor sums of squared errors.
    sum_sq: Vec<f64>,
    /// Per grid point: sum over trials of the network squared error.
    sum_net: Vec<f64>,
    /// Per grid point: sum of squared network errors (for the delta-method
    /// standard error).
    sum_net_sq: Vec<f64>,
}

impl Accumulator {
    fn zeros(points: usize, n: usize) -> Self {
        Self {
            sum_est: vec![0.0; points * n],
            sum_sq: vec![0.0; points * n],
            sum_net: vec![0.0; points],
            sum_net_sq: vec![0.0; points],
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.sum_est.iter_mut().zip(&other.sum_est) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        for (a, b) in self.sum_net.iter_mut().zip(&other.sum_net) {
            *a += b;
        }
        for (a, b) in self.sum_net_sq.iter_mut().zip(&other.sum_net_sq) {
            *a += b;
        }
    }
}

fn run_engine(
    a: &StochasticMatrix,
    dist: &SourceDistribution,
    delays: &DelaySchedule,
    t_grid: &[u64],
    trials: u64,
    seed: u64,
) -> SimulationTrace {
    assert!(trials >= 1, "at least one trial");
    assert!(!t_grid.is_empty(), "grid must be nonempty");
    assert!(
        t_grid.windows(2).all(|w| w[0] < w[1]),
        "grid must be strictly increasing"
    );
    assert!(t_grid[0] >= 1, "grid points start at t = 1");
    assert_eq!(a.n(), delays.n(), "delay schedule dimension mismatch");

    let n = a.n();
    let t_max = *t_grid.last().expect("nonempty");
    let points = t_grid.len();

    let table = KappaTable::build(a, delays, t_max);
    let kappas: Vec<u64> = t_grid.iter().map(|&t| table.kappa(t)).collect();
    let denoms: Vec<f64> = t_grid
        .iter()
        .zip(&kappas)
        .map(|(&t, &k)| if k > 0 { k as f64 } else { t as f64 })
        .collect();

    // Sparse rows: (source node, weight, delay).
    let rows: Vec<Vec<(usize, f64, u64)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| a.get(i, j) > 0.0)
                .map(|j| (j, a.get(i, j), delays.delay(i, j) as u64))
                .collect()
        })
        .collect();

    let chunk_starts: Vec<u64> = (0..trials).step_by(TRIAL_CHUNK as usize).collect();
    let partials: Vec<Accumulator> = chunk_starts
        .par_iter()
        .map(|&start| {
            let end = (start + TRIAL_CHUNK).min(trials);
            let mut acc = Accumulator::zeros(points, n);
            for trial in start..end {
                run_trial(&rows, dist, t_grid, &denoms, seed, trial, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = Accumulator::zeros(points, n);
    for part in &partials {
        total.merge(part);
    }

    let r = trials as f64;
    let mut node_mean = Vec::with_capacity(points);
    let mut node_mse = Vec::with_capacity(points);
    let mut network_mse = Vec::with_capacity(points);
    let mut empirical_tau = Vec::with_capacity(points);
    let mut tau_std_err = Vec::with_capacity(points);
    for (g, &t) in t_grid.iter().enumerate() {
        let means: Vec<f64> = (0..n).map(|i| total.sum_est[g * n + i] / r).collect();
        let mses: Vec<f64> = (0..n).map(|i| total.sum_sq[g * n + i] / r).collect();
        let net: f64 = mses.iter().sum();
        let gold = dist.sigma_sq / t as f64;
        let tau = gold / net;
        let se = if trials >= 2 {
            let mean_net = total.sum_net[g] / r;
            let var_net = (total.sum_net_sq[g] / r - mean_net * mean_net).max(0.0) * r / (r - 1.0);
            // Delta method on tau = gold / mean(net).
            tau * (var_net / r).sqrt() / mean_net
        } else {
            f64::NAN
        };
        node_mean.push(means);
        node_mse.push(mses);
        network_mse.push(net);
        empirical_tau.push(tau);
        tau_std_err.push(se);
    }

    SimulationTrace {
        t_grid: t_grid.to_vec(),
        node_mean,
        node_mse,
        network_mse,
        empirical_tau,
        tau_std_err,
        kappa: kappas,
        trials,
        seed,
    }
}

fn run_trial(
    rows: &[Vec<(usize, f64, u64)>],
    dist: &SourceDistribution,
    t_grid: &[u64],
    denoms: &[f64],
    seed: u64,
    trial: u64,
    acc: &mut Accumulator,
) {
    let n = rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let sampler = Sampler::new(dist);
    let theta = dist.theta;

    let b_max = rows
        .iter()
        .flat_map(|row| row.iter().map(|&(_, _, b)| b))
        .max()
        .unwrap_or(0);
    let depth = (b_max + 2) as usize;
    // Ring of scaled-estimate slices Z_s; slices for s <= 0 stay zero.
    let mut ring = vec![vec![0.0f64; n]; depth];
    let mut x = vec![0.0f64; n];
    let mut next_point = 0usize;

    for t in 1..=*t_grid.last().expect("nonempty") {
        for xi in x.iter_mut() {
            *xi = sampler.sample(&mut rng);
        }
        let slot = (t % depth as u64) as usize;
        if t == 1 {
            ring[slot].copy_from_slice(&x);
        } else {
            for i in 0..n {
                let mut z = 0.0;
                for &(j, w, b) in &rows[i] {
                    // Z_{t-1-b}, zero at or before time zero.
                    if t > b + 1 {
                        let s = ((t - 1 - b) % depth as u64) as usize;
                        z += w * ring[s][j];
                    }
                }
                x[i] += z;
            }
            ring[slot].copy_from_slice(&x);
        }

        if next_point < t_grid.len() && t_grid[next_point] == t {
            let denom = denoms[next_point];
            let base = next_point * n;
            let mut net = 0.0;
            for (i, &z) in ring[slot].iter().enumerate() {
                let est = z / denom;
                let err = est - theta;
                acc.sum_est[base + i] += est;
                acc.sum_sq[base + i] += err * err;
                net += err * err;
            }
            acc.sum_net[next_point] += net;
            acc.sum_net_sq[next_point] += net * net;
            next_point += 1;
        }
    }
}
