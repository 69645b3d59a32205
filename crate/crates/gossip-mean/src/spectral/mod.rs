//! Eigenvalue analysis of symmetric communication matrices and the
//! statistical performance ratio of the network estimator.
//!
//! The performance ratio `tau_t(A)` compares the mean squared error of the
//! inaccessible centralized estimator with the total error of the network
//! at time `t`. Two independent routes compute it:
//!
//! - [`tau_exact`]: the identity `tau_t(A) = t / sum_{k<t} |A^k|_F^2`, valid
//!   for every stochastic matrix; evaluated by incremental matrix powers.
//!   This is the oracle route, `O(t n^3)`.
//! - [`tau_closed_form`]: the spectral closed form for symmetric,
//!   irreducible, aperiodic matrices, evaluated from a [`SpectrumReport`].

mod eigen;

pub use eigen::EigenError;

use crate::matrix::{diagnostics, StochasticMatrix};
use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

/// Non-unit eigenvalues with `|gamma| >= 1 - DEGENERACY_TOL` make the
/// spectral coefficients blow up; they are rejected instead.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("degenerate spectrum: non-unit eigenvalue {gamma} has modulus too close to 1 (reducible or periodic input)")]
    DegenerateSpectrum { gamma: f64 },
    #[error("matrix is not irreducible and aperiodic")]
    NotErgodic,
    #[error("stationary linear system is numerically singular")]
    SingularSystem,
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Spectrum of a symmetric communication matrix together with the two
/// coefficients that govern the convergence rate of the performance ratio.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// All `N` eigenvalues, sorted descending; the leading one is the unit
    /// eigenvalue of the stochastic matrix.
    eigenvalues: Vec<f64>,
    /// `S(A) = sum_{l>=2} 1 / (1 - gamma_l^2)`.
    s_coefficient: f64,
    /// `Gamma(A) = max_{l>=2} |gamma_l|`.
    gamma_max: f64,
}

impl SpectrumReport {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalues different from the unit one: `gamma_2 ... gamma_N`.
    pub fn non_unit(&self) -> &[f64] {
        &self.eigenvalues[1..]
    }

    pub fn s_coefficient(&self) -> f64 {
        self.s_coefficient
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Full spectrum of a symmetric stochastic matrix, with `S(A)` and
/// `Gamma(A)`.
///
/// Fails when the matrix is not symmetric, or when some non-unit eigenvalue
/// has modulus within [`DEGENERACY_TOL`] of 1 — the closed-form ratio and
/// `S(A)` require `|gamma_l| < 1`, which holds exactly for irreducible
/// aperiodic matrices.
pub fn sym_eigenvalues(a: &StochasticMatrix) -> Result<SpectrumReport, SpectralError> {
    if !a.is_symmetric() {
        return Err(SpectralError::NotSymmetric);
    }
    let mut vals = eigen::symmetric_eigenvalues(a.entries())?;
    vals.reverse();
    report_from_descending(vals)
}

/// Builds a report from eigenvalues already computed elsewhere (descending
/// order expected). Eigenvalues of a symmetric stochastic matrix lie in
/// `[-1, 1]` mathematically; rounding dust outside the range is clamped so
/// downstream formulas see the exact range.
pub(crate) fn report_from_descending(mut vals: Vec<f64>) -> Result<SpectrumReport, SpectralError> {
    for v in &mut vals {
        *v = v.clamp(-1.0, 1.0);
    }
    let mut s = 0.0;
    let mut gamma_max: f64 = 0.0;
    for &g in &vals[1..] {
        if g.abs() >= 1.0 - DEGENERACY_TOL {
            return Err(SpectralError::DegenerateSpectrum { gamma: g });
        }
        s += 1.0 / (1.0 - g * g);
        gamma_max = gamma_max.max(g.abs());
    }
    Ok(SpectrumReport {
        eigenvalues: vals,
        s_coefficient: s,
        gamma_max,
    })
}

/// `gamma^(2t)` for `t >= 1`; always nonnegative since the exponent is even.
fn pow_2t(gamma: f64, t: u64) -> f64 {
    let sq = gamma * gamma;
    if 2 * t <= i32::MAX as u64 {
        gamma.powi(2 * t as i32)
    } else {
        sq.powf(t as f64)
    }
}

/// Closed-form performance ratio at time `t` for a symmetric irreducible
/// aperiodic matrix:
/// `tau_t = 1 / (1 + (1/t) sum_{l>=2} (1 - gamma_l^(2t)) / (1 - gamma_l^2))`.
pub fn tau_closed_form(spectrum: &SpectrumReport, t: u64) -> f64 {
    assert!(t >= 1, "tau is defined for t >= 1");
    let tf = t as f64;
    let mut acc = 0.0;
    for &g in spectrum.non_unit() {
        acc += (1.0 - pow_2t(g, t)) / (1.0 - g * g);
    }
    1.0 / (1.0 + acc / tf)
}

/// Exact performance ratio `tau_t(A) = t / sum_{k=0}^{t-1} |A^k|_F^2` for any
/// stochastic matrix; the oracle route, evaluated by incremental powers.
pub fn tau_exact(a: &StochasticMatrix, t: u64) -> f64 {
    *tau_exact_grid(a, &[t]).last().expect("one requested point")
}

/// [`tau_exact`] over a grid of times in one incremental pass.
///
/// `ts` must be nondecreasing; returns one ratio per entry.
pub fn tau_exact_grid(a: &StochasticMatrix, ts: &[u64]) -> Vec<f64> {
    assert!(!ts.is_empty());
    assert!(ts.iter().all(|&t| t >= 1), "tau is defined for t >= 1");
    assert!(
        ts.windows(2).all(|w| w[0] <= w[1]),
        "grid must be nondecreasing"
    );
    let n = a.n();
    let t_max = *ts.last().expect("nonempty grid");

    let mut out = Vec::with_capacity(ts.len());
    let mut norm_sum = n as f64; // |A^0|^2 = N
    let mut power: Option<Array2<f64>> = None;
    let mut next = ts.iter().peekable();
    for k in 1..=t_max {
        // norm_sum now holds sum_{j=0}^{k-1} |A^j|^2, i.e. tau at t = k.
        while next.peek() == Some(&&k) {
            out.push(k as f64 / norm_sum);
            next.next();
        }
        if k == t_max {
            break;
        }
        let p = match power {
            None => a.entries().clone(),
            Some(p) => p.dot(a.entries()),
        };
        norm_sum += p.iter().map(|v| v * v).sum::<f64>();
        power = Some(p);
    }
    out
}

/// Lower and upper bounds on the closed-form ratio:
/// `1 - S/t <= tau_t <= 1 - S/t + Gamma^(2t) S/t + (S/t)^2`.
///
/// The lower bound may be negative (vacuous) when `S > t`; it is returned
/// unchanged.
pub fn tau_bounds(spectrum: &SpectrumReport, t: u64) -> (f64, f64) {
    assert!(t >= 1, "tau is defined for t >= 1");
    let ratio = spectrum.s_coefficient / t as f64;
    let lower = 1.0 - ratio;
    let upper = lower + pow_2t(spectrum.gamma_max, t) * ratio + ratio * ratio;
    (lower, upper)
}

/// Stationary distribution of an irreducible aperiodic matrix.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryDistribution {
    mu: Vec<f64>,
}

impl StationaryDistribution {
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `sum_i mu_i^2`.
    pub fn norm_sq(&self) -> f64 {
        self.mu.iter().map(|v| v * v).sum()
    }
}

/// The unique probability vector with `mu A = mu`.
///
/// Solved densely from `(A' - I) mu = 0` with the redundant last equation
/// replaced by the normalization `sum mu_i = 1` (the rows of `A' - I` sum to
/// zero, so no information is lost).
pub fn stationary_distribution(
    a: &StochasticMatrix,
) -> Result<StationaryDistribution, SpectralError> {
    if !diagnostics(a).is_ergodic() {
        return Err(SpectralError::NotErgodic);
    }
    let n = a.n();
    let mut m = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    for i in 0..n - 1 {
        for j in 0..n {
            m[i * n + j] = a.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        m[(n - 1) * n + j] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let mu = solve_dense(&mut m, &mut rhs, n)?;
    Ok(StationaryDistribution { mu })
}

/// Gaussian elimination with partial pivoting on a flat row-major system.
fn solve_dense(m: &mut [f64], rhs: &mut [f64], n: usize) -> Result<Vec<f64>, SpectralError> {
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                m[r1 * n + col]
                    .abs()
                    .partial_cmp(&m[r2 * n + col].abs())
                    .expect("finite entries")
            })
            .expect("nonempty range");
        if m[pivot_row * n + col].abs() < 1e-14 {
            return Err(SpectralError::SingularSystem);
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m[row * n + j] -= factor * m[col * n + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in row + 1..n {
            acc -= m[row * n + j] * x[j];
        }
        x[row] = acc / m[row * n + row];
    }
    Ok(x)
}

/// Limit of the performance ratio for an irreducible aperiodic matrix:
/// `tau_t(A) -> 1 / (N |mu|^2)`, equal to 1 exactly when `mu` is uniform.
pub fn tau_limit(a: &StochasticMatrix) -> Result<f64, SpectralError> {
    let mu = stationary_distribution(a)?;
    Ok(1.0 / (a.n() as f64 * mu.norm_sq()))
}

/// Eigenvalues of an arbitrary dense symmetric matrix, ascending. Used for
/// adjacency spectra, where eigenvalues of unit modulus are legitimate.
pub(crate) fn raw_symmetric_eigenvalues(a: &Array2<f64>) -> Result<Vec<f64>, EigenError> {
    eigen::symmetric_eigenvalues(a)
}
