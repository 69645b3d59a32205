//! Property tests for the spec-level invariants, on randomized inputs.

use gossip_mean::matrix::{diagnostics, matrix_power_frobenius_sq, StochasticMatrix};
use gossip_mean::simulate::{DelaySchedule, KappaTable};
use gossip_mean::sinkhorn::{has_total_support, sinkhorn_knopp, SinkhornError, SupportMatrix};
use gossip_mean::spectral::{
    stationary_distribution, sym_eigenvalues, tau_bounds, tau_closed_form, tau_exact_grid,
};
use ndarray::Array2;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Row-normalized positive matrix: a dense stochastic matrix.
fn random_stochastic(n: usize, raw: &[f64]) -> StochasticMatrix {
    let mut entries = Array2::zeros((n, n));
    for i in 0..n {
        let row = &raw[i * n..(i + 1) * n];
        let sum: f64 = row.iter().sum();
        for j in 0..n {
            entries[(i, j)] = row[j] / sum;
        }
    }
    StochasticMatrix::from_entries(entries).expect("normalized rows")
}

/// Symmetric bistochastic matrix with positive diagonal: a convex mix of
/// the identity and symmetrized random permutations.
fn random_symmetric_ergodic(n: usize, seed: u64, weights: &[f64]) -> StochasticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = weights.iter().sum::<f64>() + 0.2;
    let mut entries = Array2::zeros((n, n));
    for i in 0..n {
        entries[(i, i)] = 0.2 / total;
    }
    for &w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        for i in 0..n {
            entries[(i, perm[i])] += 0.5 * w / total;
            entries[(perm[i], i)] += 0.5 * w / total;
        }
    }
    StochasticMatrix::from_entries(entries).expect("convex mix of bistochastic matrices")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frobenius_and_tau_stay_in_range(
        n in 2usize..8,
        raw in proptest::collection::vec(0.01f64..1.0, 64),
    ) {
        let a = random_stochastic(n, &raw);
        for k in 0..6 {
            let f = matrix_power_frobenius_sq(&a, k);
            prop_assert!(f >= 1.0 - 1e-12);
            prop_assert!(f <= n as f64 + 1e-12);
        }
        let taus = tau_exact_grid(&a, &[1, 7, 33]);
        for tau in taus {
            prop_assert!(tau >= 1.0 / n as f64 - 1e-12);
            prop_assert!(tau <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn closed_form_tracks_oracle_on_random_symmetric_matrices(
        n in 3usize..9,
        seed in 0u64..1_000,
        weights in proptest::collection::vec(0.05f64..1.0, 3),
    ) {
        let a = random_symmetric_ergodic(n, seed, &weights);
        let diag = diagnostics(&a);
        prop_assume!(diag.is_ergodic());
        let report = sym_eigenvalues(&a).expect("ergodic symmetric matrix");
        prop_assert!(report.s_coefficient() >= n as f64 - 1.0 - 1e-9);

        let grid: Vec<u64> = (1..=50).collect();
        let exact = tau_exact_grid(&a, &grid);
        for (&t, &tau_e) in grid.iter().zip(exact.iter()) {
            let tau_c = tau_closed_form(&report, t);
            prop_assert!((tau_c - tau_e).abs() <= 1e-9,
                "t = {}: closed {} vs exact {}", t, tau_c, tau_e);
            let (lower, upper) = tau_bounds(&report, t);
            prop_assert!(lower - 1e-12 <= tau_c && tau_c <= upper + 1e-12);
        }
    }

    #[test]
    fn stationary_distribution_is_a_fixed_point(
        n in 2usize..8,
        raw in proptest::collection::vec(0.05f64..1.0, 64),
    ) {
        // Dense positive rows: irreducible and aperiodic by construction.
        let a = random_stochastic(n, &raw);
        let mu = stationary_distribution(&a).expect("dense positive matrix is ergodic");
        let total: f64 = mu.mu().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for &v in mu.mu() {
            prop_assert!(v >= 0.0);
        }
        for j in 0..n {
            let image: f64 = (0..n).map(|i| mu.mu()[i] * a.get(i, j)).sum();
            prop_assert!((image - mu.mu()[j]).abs() <= 1e-10);
        }
    }

    #[test]
    fn sinkhorn_contract_on_random_supports(
        n in 2usize..7,
        seed in 0u64..10_000,
        extra_edges in 0usize..12,
    ) {
        // A permutation diagonal plus random extra entries; total support
        // is not guaranteed, and the balancer must refuse exactly when the
        // test says no.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut entries = Array2::zeros((n, n));
        for i in 0..n {
            entries[(i, perm[i])] = 1.0;
        }
        for _ in 0..extra_edges {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            entries[(i, j)] = 1.0;
        }
        let g = SupportMatrix::from_entries(entries).expect("0/1 matrix");
        // Tight tolerance: the balanced matrix must clear the 1e-12
        // bistochasticity gate of the graph diagnostics.
        match sinkhorn_knopp(&g, 2e-13, 200_000) {
            Ok(result) => {
                prop_assert!(has_total_support(&g));
                prop_assert!(result.residual <= 2e-13);
                let d = diagnostics(&result.balanced);
                prop_assert!(d.bistochastic);
                for i in 0..n {
                    for j in 0..n {
                        prop_assert_eq!(
                            result.balanced.get(i, j) > 0.0,
                            g.entries()[(i, j)] > 0.0
                        );
                    }
                }
            }
            Err(SinkhornError::NoTotalSupport) => prop_assert!(!has_total_support(&g)),
            Err(e) => prop_assert!(false, "unexpected error: {}", e),
        }
    }

    #[test]
    fn kappa_is_monotone_bounded_and_above_the_uniform_floor(
        n in 2usize..7,
        raw in proptest::collection::vec(0.05f64..1.0, 49),
        b_max in 0u32..5,
        delay_seed in 0u64..1_000,
    ) {
        let a = random_stochastic(n, &raw);
        let delays = DelaySchedule::random_on_support(&a, b_max, delay_seed);
        let t_max = 300u64;
        let table = KappaTable::build(&a, &delays, t_max);
        let mut last = 0u64;
        for t in 1..=t_max {
            let k = table.kappa(t);
            prop_assert!(k >= last);
            prop_assert!(k <= t);
            // Every path gathers at most b_max delay per step.
            let b = delays.b_max() as u64;
            if t > b {
                prop_assert!(k >= (t - b).div_ceil(b + 1));
            }
            last = k;
        }
    }
}
