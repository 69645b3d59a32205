//! Experiment implementations behind the subcommands.

use crate::config::*;
use crate::error::CliError;
use crate::output::{Cell, RunOutput};
use gossip_mean::matrix::{self, MatrixKind, StochasticMatrix};
use gossip_mean::ramanujan;
use gossip_mean::simulate::{self, DelaySchedule, SourceDistribution};
use gossip_mean::spectral::{self, SpectralError};
use gossip_mean::tradeoff;
use serde_json::{json, Value};

pub fn run(config: ExperimentConfig) -> Result<RunOutput, CliError> {
    match &config {
        ExperimentConfig::Analyze(c) => analyze(c.clone(), config),
        ExperimentConfig::Simulate(c) => simulate_cmd(c.clone(), config),
        ExperimentConfig::Ramanujan(c) => ramanujan_cmd(c.clone(), config),
        ExperimentConfig::Tradeoff(c) => tradeoff_cmd(c.clone(), config),
        ExperimentConfig::Budget(c) => budget_cmd(c.clone(), config),
    }
}

fn build_matrix(
    spec: MatrixSpec,
    n: usize,
    alpha: Option<f64>,
) -> Result<StochasticMatrix, CliError> {
    let built = match spec {
        MatrixSpec::Identity => matrix::build_named(MatrixKind::Identity, n),
        MatrixSpec::Full => matrix::build_named(MatrixKind::Full, n),
        MatrixSpec::A1 => matrix::build_named(MatrixKind::TridiagA1, n),
        MatrixSpec::A2 => matrix::build_named(MatrixKind::TridiagA2, n),
        MatrixSpec::A3 => matrix::build_named(MatrixKind::StarA3, n),
        MatrixSpec::HAlpha => {
            let alpha = alpha.ok_or_else(|| CliError::config("h-alpha requires --alpha"))?;
            matrix::build_h_alpha(alpha)
        }
    };
    built.map_err(|e| CliError::config(format!("matrix construction: {e}")))
}

fn eigenvalues_json(vals: &[f64]) -> Value {
    Value::Array(
        vals.iter()
            .map(|&v| {
                serde_json::Number::from_f64(v)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            })
            .collect(),
    )
}

fn analyze(c: AnalyzeConfig, config: ExperimentConfig) -> Result<RunOutput, CliError> {
    let a = build_matrix(c.matrix, c.n, c.alpha)?;
    let mut t_grid = c.t_grid.clone();
    t_grid.sort_unstable();
    t_grid.dedup();
    if t_grid.is_empty() || t_grid[0] == 0 {
        return Err(CliError::config("the t grid must contain integers >= 1"));
    }

    let mut out = RunOutput::new(config, c.seed);
    let diag = matrix::diagnostics(&a);
    out.meta_entry("n", json!(a.n()));
    out.meta_entry("irreducible", json!(diag.irreducible));
    out.meta_entry("period", json!(diag.period));
    out.meta_entry("bistochastic", json!(diag.bistochastic));
    out.meta_entry("symmetric", json!(diag.symmetric));
    out.meta_entry("complexity_index", json!(diag.complexity_index));

    let spectrum = if diag.symmetric {
        match spectral::sym_eigenvalues(&a) {
            Ok(report) => {
                out.meta_entry("s_coefficient", json!(report.s_coefficient()));
                out.meta_entry("gamma_max", json!(report.gamma_max()));
                out.meta_entry("eigenvalues", eigenvalues_json(report.eigenvalues()));
                Some(report)
            }
            Err(SpectralError::DegenerateSpectrum { gamma }) => {
                out.meta_entry("degenerate_spectrum", json!(true));
                out.meta_entry("degenerate_gamma", json!(gamma));
                None
            }
            Err(e) => return Err(CliError::compute(e)),
        }
    } else {
        None
    };

    match spectral::tau_limit(&a) {
        Ok(limit) => out.meta_entry("tau_limit", json!(limit)),
        Err(SpectralError::NotErgodic) => out.meta_entry("tau_limit", Value::Null),
        Err(e) => return Err(CliError::compute(e)),
    }

    let tau_exact = spectral::tau_exact_grid(&a, &t_grid);
    out.columns = vec!["t".into(), "tau_exact".into()];
    if spectrum.is_some() {
        out.columns
            .extend(["tau_closed_form", "tau_lower", "tau_upper"].map(String::from));
    }
    for (idx, &t) in t_grid.iter().enumerate() {
        let mut row = vec![Cell::UInt(t), Cell::Float(tau_exact[idx])];
        if let Some(report) = &spectrum {
            let (lower, upper) = spectral::tau_bounds(report, t);
            row.push(Cell::Float(spectral::tau_closed_form(report, t)));
            row.push(Cell::Float(lower));
            row.push(Cell::Float(upper));
        }
        out.rows.push(row);
    }
    Ok(out)
}

fn source_distribution(c: &SimulateConfig) -> Result<SourceDistribution, CliError> {
    match c.dist {
        SourceSpec::Uniform01 => Ok(SourceDistribution::uniform01()),
        SourceSpec::Gaussian => {
            let std_dev = c.std_dev.unwrap_or(1.0);
            if std_dev <= 0.0 {
                return Err(CliError::config("--std-dev must be positive"));
            }
            Ok(SourceDistribution::gaussian(c.mean.unwrap_or(0.0), std_dev))
        }
        SourceSpec::Bernoulli => {
            let p = c.p.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::config("--p must lie in [0, 1]"));
            }
            Ok(SourceDistribution::bernoulli(p))
        }
    }
}

fn simulate_cmd(c: SimulateConfig, config: ExperimentConfig) -> Result<RunOutput, CliError> {
    let a = build_matrix(c.matrix, c.n, c.alpha)?;
    let dist = source_distribution(&c)?;
    if c.trials == 0 || c.t_max == 0 {
        return Err(CliError::config("--trials and --t-max must be >= 1"));
    }

    let mut out = RunOutput::new(config, c.seed);
    out.meta_entry("theta", json!(dist.theta));
    out.meta_entry("sigma_sq", json!(dist.sigma_sq));

    let trace = if c.b_max == 0 {
        out.meta_entry("mode", json!("synchronous"));
        simulate::run_synchronous(&a, &dist, c.t_max, c.trials, c.seed)
    } else {
        if !dist.bounded {
            return Err(CliError::config(
                "the delayed model requires a bounded source distribution",
            ));
        }
        out.meta_entry("mode", json!("asynchronous"));
        out.meta_entry("b_max", json!(c.b_max));
        let delays = match c.delay_mode {
            DelayMode::Constant => {
                out.meta_entry("delay_mode", json!("constant"));
                DelaySchedule::constant(a.n(), c.b_max)
            }
            DelayMode::Random => {
                let delay_seed = c.delay_seed.expect("resolved during config merge");
                out.meta_entry("delay_mode", json!("random"));
                out.meta_entry("delay_seed", json!(delay_seed));
                DelaySchedule::random_on_support(&a, c.b_max, delay_seed)
            }
        };
        simulate::run_asynchronous(&a, &dist, &delays, c.t_max, c.trials, c.seed)
    };

    let n = a.n();
    let node_columns = n <= 16;
    out.columns = vec![
        "t".into(),
        "kappa".into(),
        "network_mse".into(),
        "empirical_tau".into(),
        "tau_std_err".into(),
    ];
    if node_columns {
        for i in 0..n {
            out.columns.push(format!("node_mean_{i}"));
        }
        for i in 0..n {
            out.columns.push(format!("node_mse_{i}"));
        }
    } else {
        out.meta_entry("node_columns_omitted", json!(n));
    }
    for (g, &t) in trace.t_grid.iter().enumerate() {
        let mut row = vec![
            Cell::UInt(t),
            Cell::UInt(trace.kappa[g]),
            Cell::Float(trace.network_mse[g]),
            Cell::Float(trace.empirical_tau[g]),
            Cell::Float(trace.tau_std_err[g]),
        ];
        if node_columns {
            for i in 0..n {
                row.push(Cell::Float(trace.node_mean[g][i]));
            }
            for i in 0..n {
                row.push(Cell::Float(trace.node_mse[g][i]));
            }
        }
        out.rows.push(row);
    }
    Ok(out)
}

fn ramanujan_cmd(c: RamanujanConfig, config: ExperimentConfig) -> Result<RunOutput, CliError> {
    if c.d < 3 || c.d >= c.n || !(c.n * c.d).is_multiple_of(2) {
        return Err(CliError::config(format!(
            "infeasible parameters: need 3 <= d < n and n*d even, got n = {}, d = {}",
            c.n, c.d
        )));
    }
    let generated = ramanujan::generate_with_details(c.n, c.d, c.seed, c.max_attempts)
        .map_err(CliError::compute)?;

    let mut out = RunOutput::new(config, c.seed);
    out.meta_entry("attempts", json!(generated.attempts));
    out.meta_entry("is_ramanujan", json!(generated.verdict.is_ramanujan));
    out.meta_entry("mu2", json!(generated.verdict.mu2));
    out.meta_entry("mu_n", json!(generated.verdict.mu_n));
    out.meta_entry("threshold", json!(generated.verdict.threshold));
    out.meta_entry("gamma_max", json!(generated.spectrum.gamma_max()));
    out.meta_entry("s_coefficient", json!(generated.spectrum.s_coefficient()));
    out.meta_entry("complexity_index", json!(c.d));
    out.meta_entry(
        "eigenvalues",
        eigenvalues_json(generated.spectrum.eigenvalues()),
    );

    out.columns = vec!["u".into(), "v".into()];
    for (u, v) in generated.graph.edges() {
        out.rows
            .push(vec![Cell::UInt(u as u64), Cell::UInt(v as u64)]);
    }
    Ok(out)
}

fn tradeoff_cmd(c: TradeoffConfig, config: ExperimentConfig) -> Result<RunOutput, CliError> {
    if c.d_min < 3 || c.d_min > c.d_max || c.d_max >= c.n {
        return Err(CliError::config(format!(
            "degree range must satisfy 3 <= d_min <= d_max < n, got {}..{} at n = {}",
            c.d_min, c.d_max, c.n
        )));
    }
    if c.betas.is_empty() {
        return Err(CliError::config("--betas must list at least one penalty"));
    }
    let d_range: Vec<usize> = (c.d_min..=c.d_max).collect();
    let sweep =
        tradeoff::penalized_sweep_averaged(c.n, &d_range, &c.betas, c.seed, c.repeats.max(1));

    let mut out = RunOutput::new(config, c.seed);
    let d_stars: Vec<Value> = c
        .betas
        .iter()
        .map(|&beta| json!({ "beta": beta, "d_star": sweep.d_star(beta) }))
        .collect();
    out.meta_entry("d_star", Value::Array(d_stars));
    let skipped: Vec<Value> = sweep
        .skipped
        .iter()
        .map(|(d, reason)| json!({ "d": d, "reason": reason }))
        .collect();
    out.meta_entry("skipped", Value::Array(skipped));

    out.columns = ["n", "d", "s_coeff", "c_index", "beta", "penalized"]
        .map(String::from)
        .to_vec();
    for r in &sweep.records {
        out.rows.push(vec![
            Cell::UInt(r.n as u64),
            Cell::UInt(r.d as u64),
            Cell::Float(r.s_coeff),
            Cell::UInt(r.c_index as u64),
            Cell::Float(r.beta),
            Cell::Float(r.penalized),
        ]);
    }
    Ok(out)
}

fn budget_cmd(c: BudgetConfig, config: ExperimentConfig) -> Result<RunOutput, CliError> {
    if !(c.threshold > 0.0 && c.threshold < 1.0) {
        return Err(CliError::config(
            "--threshold must lie strictly between 0 and 1",
        ));
    }
    if c.n_min < 2 || c.n_min > c.n_max || c.n_step == 0 {
        return Err(CliError::config("need 2 <= n-min <= n-max and n-step >= 1"));
    }
    if c.total / c.n_max as u64 == 0 {
        return Err(CliError::config(
            "--total must allow at least one sample per node",
        ));
    }
    let n_grid: Vec<usize> = (c.n_min..=c.n_max).step_by(c.n_step).collect();
    let records =
        tradeoff::budget_analysis_with_cap(c.total, &n_grid, c.threshold, c.seed, c.d_cap);

    let mut out = RunOutput::new(config, c.seed);
    let best = tradeoff::recommend(&records);
    out.meta_entry(
        "recommended",
        best.map(|r| json!({ "n": r.n, "d_star": r.d_star, "cost_ratio": r.cost_ratio }))
            .unwrap_or(Value::Null),
    );

    out.columns = ["n", "t_per_node", "d_star", "cost_ratio"]
        .map(String::from)
        .to_vec();
    for r in &records {
        out.rows.push(vec![
            Cell::UInt(r.n as u64),
            Cell::UInt(r.t_per_node),
            match r.d_star {
                Some(d) => Cell::UInt(d as u64),
                None => Cell::Text("infeasible".into()),
            },
            match r.cost_ratio {
                Some(ratio) => Cell::Float(ratio),
                None => Cell::Empty,
            },
        ]);
    }
    Ok(out)
}

impl CliError {
    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn compute(msg: impl std::fmt::Display) -> Self {
        CliError::Compute(msg.to_string())
    }
}
