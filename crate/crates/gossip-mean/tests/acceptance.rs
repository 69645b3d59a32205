//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured values.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the lines for passing criteria too.

use gossip_mean::matrix::{build_h_alpha, build_named, diagnostics, MatrixKind};
use gossip_mean::ramanujan::{
    self, generate_with_details, ramanujan_verdict, random_regular_graph,
};
use gossip_mean::simulate::{self, DelaySchedule, SourceDistribution};
use gossip_mean::sinkhorn::{has_total_support, sinkhorn_knopp, SupportMatrix};
use gossip_mean::spectral::{
    sym_eigenvalues, tau_bounds, tau_closed_form, tau_exact, tau_exact_grid,
};
use gossip_mean::{seeds, tradeoff};
use std::f64::consts::PI;

/// Collects failures for one criterion and prints its verdict.
struct Criterion {
    id: u32,
    label: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(id: u32, label: &'static str) -> Self {
        Self {
            id,
            label,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(detail());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("criterion {:2} ({}): PASS", self.id, self.label);
        } else {
            println!(
                "criterion {:2} ({}): FAIL - {}",
                self.id,
                self.label,
                self.failures.join("; ")
            );
            panic!("criterion {} failed: {}", self.id, self.failures.join("; "));
        }
    }
}

#[test]
fn criterion_01_identity_baseline() {
    let mut c = Criterion::new(1, "identity baseline tau = 1/N");
    for n in [2usize, 5, 10, 100] {
        let a = build_named(MatrixKind::Identity, n).unwrap();
        let taus = tau_exact_grid(&a, &[1, 10, 1000]);
        for (&t, &tau) in [1u64, 10, 1000].iter().zip(taus.iter()) {
            let expected = 1.0 / n as f64;
            c.check((tau - expected).abs() <= 1e-14, || {
                format!("N={n} t={t}: tau={tau} expected={expected}")
            });
        }
    }
    c.finish();
}

/// The matrices shared by criteria 2 and 5.
fn oracle_matrices() -> Vec<(String, gossip_mean::StochasticMatrix)> {
    let mut set = vec![
        (
            "A0(N=50)".to_string(),
            build_named(MatrixKind::Full, 50).unwrap(),
        ),
        (
            "A1(N=50)".to_string(),
            build_named(MatrixKind::TridiagA1, 50).unwrap(),
        ),
        (
            "A2(N=50)".to_string(),
            build_named(MatrixKind::TridiagA2, 50).unwrap(),
        ),
    ];
    for (i, d) in [3usize, 5, 3].iter().enumerate() {
        let seed = 101 + i as u64;
        let m = ramanujan::generate_comm_matrix(50, *d, seed, 100).unwrap();
        set.push((format!("Ramanujan(N=50,d={d},seed={seed})"), m));
    }
    set
}

#[test]
fn criterion_02_oracle_equivalence() {
    let mut c = Criterion::new(2, "closed form matches exact oracle to 1e-9");
    let grid: Vec<u64> = (1..=200).collect();
    for (label, a) in oracle_matrices() {
        let report = sym_eigenvalues(&a).unwrap();
        let exact = tau_exact_grid(&a, &grid);
        for (&t, &tau_e) in grid.iter().zip(exact.iter()) {
            let tau_c = tau_closed_form(&report, t);
            c.check((tau_c - tau_e).abs() <= 1e-9, || {
                format!("{label} t={t}: closed={tau_c} exact={tau_e}")
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_03_a1_spectrum_and_s_scaling() {
    let mut c = Criterion::new(3, "A1 spectrum formula and S-scaling windows");
    for n in [5usize, 50, 200] {
        let a = build_named(MatrixKind::TridiagA1, n).unwrap();
        let report = sym_eigenvalues(&a).unwrap();
        for (l, &gamma) in report.eigenvalues().iter().enumerate() {
            let expected = (l as f64 * PI / n as f64).cos();
            c.check((gamma - expected).abs() <= 1e-9, || {
                format!(
                    "N={n} l={}: eigenvalue {gamma} vs cos formula {expected}",
                    l + 1
                )
            });
        }
    }
    let s1 = sym_eigenvalues(&build_named(MatrixKind::TridiagA1, 200).unwrap())
        .unwrap()
        .s_coefficient();
    let ratio1 = s1 * 6.0 / (200.0 * 200.0);
    c.check((0.95..=1.05).contains(&ratio1), || {
        format!("S(A1)*6/N^2 = {ratio1:.6} outside [0.95, 1.05] (S(A1) = {s1:.3}, exact identity gives (N^2-1)/3 so the ratio sits at 2)")
    });
    let s2 = sym_eigenvalues(&build_named(MatrixKind::TridiagA2, 200).unwrap())
        .unwrap()
        .s_coefficient();
    let ratio2 = s2 * 9.0 / (200.0 * 200.0);
    c.check((0.95..=1.05).contains(&ratio2), || {
        format!("S(A2)*9/N^2 = {ratio2:.6} outside [0.95, 1.05] (S(A2) = {s2:.3}, true asymptotics are N^2/4 so the ratio sits at 9/4)")
    });
    c.finish();
}

#[test]
fn criterion_04_h_alpha_limits() {
    let mut c = Criterion::new(4, "H_alpha ratio limits");
    for alpha in [1.5f64, 2.0, 3.0, 10.0] {
        let h = build_h_alpha(alpha).unwrap();
        let tau = tau_exact(&h, 100_000);
        let limit = alpha * alpha / (2.0 + 2.0 * (alpha - 1.0) * (alpha - 1.0));
        c.check((tau - limit).abs() <= 1e-3, || {
            format!("alpha={alpha}: tau={tau} limit={limit}")
        });
        if alpha == 2.0 {
            c.check((tau - 1.0).abs() <= 1e-3, || {
                format!("alpha=2: tau={tau} should be 1")
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_05_theorem_sandwich() {
    let mut c = Criterion::new(5, "bounds sandwich the closed form");
    for (label, a) in oracle_matrices() {
        let report = sym_eigenvalues(&a).unwrap();
        let s = report.s_coefficient();
        for t in 1..=200u64 {
            if s / t as f64 > 1.0 {
                continue;
            }
            let tau = tau_closed_form(&report, t);
            let (lower, upper) = tau_bounds(&report, t);
            c.check(lower - 1e-12 <= tau && tau <= upper + 1e-12, || {
                format!("{label} t={t}: tau={tau} not in [{lower}, {upper}]")
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_06_ramanujan_generation() {
    let mut c = Criterion::new(6, "seeded Ramanujan generation at (100, 3)");
    let (n, d) = (100usize, 3usize);
    let s_cap = (n as f64 - 1.0) / (1.0 - 4.0 * (d as f64 - 1.0) / (d as f64 * d as f64));
    for run in 0..100u64 {
        let seed = seeds::derive(4242, &[run]);
        match generate_with_details(n, d, seed, 100) {
            Ok(generated) => {
                let diag = diagnostics(&generated.matrix);
                c.check(diag.is_ergodic(), || format!("run {run}: not ergodic"));
                c.check(generated.verdict.is_ramanujan, || {
                    format!("run {run}: verdict failed")
                });
                let s = generated.spectrum.s_coefficient();
                c.check(s >= n as f64 - 1.0 && s <= s_cap + 1e-9, || {
                    format!("run {run}: S = {s} outside [{}, {s_cap}]", n - 1)
                });
            }
            Err(e) => c.check(false, || format!("run {run}: generation failed: {e}")),
        }
    }
    let mut accepted = 0;
    for run in 0..100u64 {
        let g = random_regular_graph(n, d, seeds::derive(777, &[run])).unwrap();
        if ramanujan_verdict(&g).is_ramanujan {
            accepted += 1;
        }
    }
    c.check(accepted >= 50, || {
        format!("raw acceptance rate {accepted}/100 below 50%")
    });
    c.finish();
}

#[test]
fn criterion_07_monte_carlo_agreement() {
    let mut c = Criterion::new(7, "empirical tau within 3 SE of closed form");
    let a = build_named(MatrixKind::TridiagA2, 5).unwrap();
    let report = sym_eigenvalues(&a).unwrap();
    let dist = SourceDistribution::uniform01();
    let trace = simulate::run_synchronous_on_grid(&a, &dist, &[10, 100, 1000], 10_000, 314);
    for (g, &t) in trace.t_grid.iter().enumerate() {
        let expected = tau_closed_form(&report, t);
        let (tau, se) = (trace.empirical_tau[g], trace.tau_std_err[g]);
        c.check((tau - expected).abs() <= 3.0 * se, || {
            format!(
                "t={t}: empirical={tau} closed={expected} gap={:.2} SEs",
                (tau - expected).abs() / se
            )
        });
    }
    c.finish();
}

#[test]
fn criterion_08_asynchronous_decay() {
    let mut c = Criterion::new(8, "delayed-model MSE decays like 1/t");
    let a = build_named(MatrixKind::TridiagA1, 10).unwrap();
    let dist = SourceDistribution::uniform01();
    let delays = DelaySchedule::constant(10, 3);
    let trace = simulate::run_asynchronous(&a, &dist, &delays, 20_000, 2000, 2718);

    let points: Vec<(f64, f64)> = trace
        .t_grid
        .iter()
        .zip(trace.network_mse.iter())
        .filter(|(&t, _)| (2000..=20_000).contains(&t))
        .map(|(&t, &mse)| ((t as f64).ln(), mse.ln()))
        .collect();
    let slope = least_squares_slope(&points);
    c.check((-1.3..=-0.7).contains(&slope), || {
        format!(
            "log-log slope {slope:.4} outside [-1.3, -0.7] over {} points",
            points.len()
        )
    });

    // Degenerate case: zero delays reproduce the synchronous trace
    // bit-for-bit at equal seeds.
    let grid = simulate::default_t_grid(2000);
    let sync = simulate::run_synchronous_on_grid(&a, &dist, &grid, 100, 99);
    let zero = DelaySchedule::zero(10);
    let asyn = simulate::run_asynchronous_on_grid(&a, &dist, &zero, &grid, 100, 99);
    for g in 0..grid.len() {
        c.check(
            sync.network_mse[g].to_bits() == asyn.network_mse[g].to_bits(),
            || format!("t={}: sync and zero-delay async traces differ", grid[g]),
        );
        for i in 0..10 {
            c.check(
                sync.node_mse[g][i].to_bits() == asyn.node_mse[g][i].to_bits(),
                || format!("t={} node {i}: traces differ", grid[g]),
            );
        }
    }
    c.finish();
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn criterion_09_budget_study() {
    let mut c = Criterion::new(9, "fixed-budget study finds (n in [500,1000], d*=3)");
    let n_grid: Vec<usize> = (100..=2000).step_by(10).collect();
    let mut minimizer_hits = 0;
    let mut monotone_hits = 0;
    let master_seeds: Vec<u64> = (1..=10).collect();
    for &seed in &master_seeds {
        let records = tradeoff::budget_analysis(100_000_000, &n_grid, 0.99, seed);
        let best = tradeoff::recommend(&records).expect("some feasible record");
        if best.d_star == Some(3) && (500..=1000).contains(&best.n) {
            minimizer_hits += 1;
        }
        let beyond: Vec<usize> = records
            .iter()
            .filter(|r| r.n > best.n)
            .filter_map(|r| r.d_star)
            .collect();
        if beyond.windows(2).all(|w| w[0] <= w[1]) {
            monotone_hits += 1;
        }
    }
    c.check(minimizer_hits >= 8, || {
        format!("minimizer in region for only {minimizer_hits}/10 seeds")
    });
    c.check(monotone_hits >= 8, || {
        format!("d* non-decreasing beyond minimizer for only {monotone_hits}/10 seeds")
    });
    c.finish();
}

#[test]
fn criterion_10_penalized_tradeoff() {
    let mut c = Criterion::new(10, "penalized d* non-increasing in beta");
    let betas = [0.5f64, 1.0, 2.0, 4.0];
    let d_range: Vec<usize> = (3..=199).collect();
    let mut hits = 0;
    for seed in 1..=10u64 {
        let sweep = tradeoff::penalized_sweep(200, &d_range, &betas, seed);
        let stars: Vec<usize> = betas
            .iter()
            .map(|&b| sweep.d_star(b).expect("records exist for every beta"))
            .collect();
        if stars.windows(2).all(|w| w[0] >= w[1]) {
            hits += 1;
        } else {
            println!("  seed {seed}: d* by beta = {stars:?}");
        }
    }
    c.check(hits >= 8, || {
        format!("monotone d* for only {hits}/10 seeds")
    });
    c.finish();
}

#[test]
fn criterion_11_sinkhorn() {
    let mut c = Criterion::new(11, "Sinkhorn balancing and total support");
    let a1 = build_named(MatrixKind::TridiagA1, 10).unwrap();
    let support = SupportMatrix::from_support_of(&a1);
    match sinkhorn_knopp(&support, 1e-10, 100_000) {
        Ok(result) => {
            c.check(result.residual <= 1e-10, || {
                format!("residual {} above 1e-10", result.residual)
            });
            let n = 10;
            for j in 0..n {
                let col: f64 = (0..n).map(|i| result.balanced.get(i, j)).sum();
                c.check((col - 1.0).abs() <= 1e-10, || {
                    format!("column {j} sums to {col}")
                });
            }
            for i in 0..n {
                let row: f64 = (0..n).map(|j| result.balanced.get(i, j)).sum();
                c.check((row - 1.0).abs() <= 1e-10, || {
                    format!("row {i} sums to {row}")
                });
                for j in 0..n {
                    c.check(
                        (result.balanced.get(i, j) > 0.0) == (support.entries()[(i, j)] > 0.0),
                        || format!("support changed at ({i}, {j})"),
                    );
                }
            }
        }
        Err(e) => c.check(false, || format!("balancing failed: {e}")),
    }
    let bad = SupportMatrix::from_entries(ndarray::arr2(&[[1.0, 1.0], [0.0, 1.0]])).unwrap();
    c.check(!has_total_support(&bad), || {
        "[[1,1],[0,1]] wrongly reported as having total support".to_string()
    });
    c.finish();
}
