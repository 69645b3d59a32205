//! Command-line definitions and flag/config-file/default resolution.

use crate::config::*;
use crate::error::CliError;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "gossip-mean",
    version,
    about = "Spectral analysis and simulation of communication matrices for collaborative mean estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagnostics, spectrum and performance ratio of a named matrix.
    Analyze(AnalyzeArgs),
    /// Monte Carlo run of the estimation recursion, plain or delayed.
    Simulate(SimulateArgs),
    /// Generate an ergodic Ramanujan communication matrix.
    Ramanujan(RamanujanArgs),
    /// Penalized efficiency/complexity sweep over the degree.
    Tradeoff(TradeoffArgs),
    /// Smallest degree meeting a performance threshold under a data budget.
    Budget(BudgetArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: csv or structured.
    #[arg(long)]
    pub format: Option<String>,
    /// Rayon thread count (defaults to the number of cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// identity | full | a1 | a2 | a3 | h-alpha
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter of the h-alpha matrix (requires --matrix h-alpha).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated times, e.g. 1,10,100,1000.
    #[arg(long = "t")]
    pub t_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// uniform01 | gaussian | bernoulli
    #[arg(long)]
    pub dist: Option<String>,
    /// Gaussian mean.
    #[arg(long)]
    pub mean: Option<f64>,
    /// Gaussian standard deviation.
    #[arg(long)]
    pub std_dev: Option<f64>,
    /// Bernoulli success probability.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub t_max: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Maximum link delay; 0 runs the synchronous model.
    #[arg(long)]
    pub b_max: Option<u32>,
    /// constant | random
    #[arg(long)]
    pub delay_mode: Option<String>,
    /// Seed for the random delay schedule (derived from --seed by default).
    #[arg(long)]
    pub delay_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RamanujanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub max_attempts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d_min: Option<usize>,
    /// Defaults to n - 1.
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Comma-separated penalties, e.g. 0.5,1,2,4.
    #[arg(long)]
    pub betas: Option<String>,
    /// Graph samples averaged per degree.
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Total number of data points streamed to the whole network.
    #[arg(long)]
    pub total: Option<u64>,
    /// Required performance ratio at t = total / n.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub n_step: Option<usize>,
    /// Upper bound of the degree scan.
    #[arg(long)]
    pub d_cap: Option<usize>,
}

/// Execution details that are not part of the reproducible config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn load_config_file(
    common: &CommonArgs,
    expected: &'static str,
) -> Result<Option<ExperimentConfig>, CliError> {
    let Some(path) = &common.config else {
        return Ok(None);
    };
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse_config_file(&bytes).map_err(CliError::config)?;
    if config.command_name() != expected {
        return Err(CliError::config(format!(
            "config file is for '{}' but the '{expected}' command was invoked",
            config.command_name()
        )));
    }
    Ok(Some(config))
}

fn resolve_format(
    flag: &Option<String>,
    file: Option<OutputFormat>,
) -> Result<OutputFormat, CliError> {
    match flag {
        Some(s) => s.parse().map_err(CliError::config),
        None => Ok(file.unwrap_or(OutputFormat::Csv)),
    }
}

fn resolve_matrix(flag: &Option<String>, file: Option<MatrixSpec>) -> Result<MatrixSpec, CliError> {
    match flag {
        Some(s) => s.parse().map_err(CliError::config),
        None => file.ok_or_else(|| CliError::config("--matrix is required")),
    }
}

/// `n` resolution shared by analyze and simulate: h-alpha is always 2x2.
fn resolve_n(
    matrix: MatrixSpec,
    flag: Option<usize>,
    file: Option<usize>,
) -> Result<usize, CliError> {
    if matrix == MatrixSpec::HAlpha {
        let n = flag.or(file).unwrap_or(2);
        if n != 2 {
            return Err(CliError::config("h-alpha is 2x2; omit --n or pass --n 2"));
        }
        return Ok(2);
    }
    flag.or(file)
        .ok_or_else(|| CliError::config("--n is required"))
}

/// Turns parsed arguments into a resolved config plus execution options.
pub fn resolve(cli: Cli) -> Result<(ExperimentConfig, RunOptions), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let file = match load_config_file(&args.common, "analyze")? {
                Some(ExperimentConfig::Analyze(c)) => Some(c),
                Some(_) => unreachable!("tag checked"),
                None => None,
            };
            let matrix = resolve_matrix(&args.matrix, file.as_ref().map(|c| c.matrix))?;
            let n = resolve_n(matrix, args.n, file.as_ref().map(|c| c.n))?;
            let t_grid = match &args.t_grid {
                Some(list) => parse_u64_list(list).map_err(CliError::config)?,
                None => file
                    .as_ref()
                    .map(|c| c.t_grid.clone())
                    .unwrap_or_else(|| vec![1, 10, 100, 1000, 10_000]),
            };
            let config = AnalyzeConfig {
                matrix,
                n,
                alpha: args.alpha.or(file.as_ref().and_then(|c| c.alpha)),
                t_grid,
                seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.seed))
                    .unwrap_or(0),
                format: resolve_format(&args.common.format, file.as_ref().map(|c| c.format))?,
            };
            Ok((
                ExperimentConfig::Analyze(config),
                RunOptions {
                    out: args.common.out,
                    threads: args.common.threads,
                },
            ))
        }
        Command::Simulate(args) => {
            let file = match load_config_file(&args.common, "simulate")? {
                Some(ExperimentConfig::Simulate(c)) => Some(c),
                Some(_) => unreachable!("tag checked"),
                None => None,
            };
            let matrix = resolve_matrix(&args.matrix, file.as_ref().map(|c| c.matrix))?;
            let n = resolve_n(matrix, args.n, file.as_ref().map(|c| c.n))?;
            let dist = match &args.dist {
                Some(s) => s.parse().map_err(CliError::config)?,
                None => file
                    .as_ref()
                    .map(|c| c.dist)
                    .unwrap_or(SourceSpec::Uniform01),
            };
            let delay_mode = match &args.delay_mode {
                Some(s) => s.parse().map_err(CliError::config)?,
                None => file
                    .as_ref()
                    .map(|c| c.delay_mode)
                    .unwrap_or(DelayMode::Random),
            };
            let seed = args
                .common
                .seed
                .or(file.as_ref().map(|c| c.seed))
                .unwrap_or(0);
            let b_max = args.b_max.or(file.as_ref().map(|c| c.b_max)).unwrap_or(0);
            // Resolve the delay seed now so the embedded config pins it.
            let delay_seed = if b_max > 0 && delay_mode == DelayMode::Random {
                Some(
                    args.delay_seed
                        .or(file.as_ref().and_then(|c| c.delay_seed))
                        .unwrap_or_else(|| gossip_mean::seeds::derive(seed, &[u64::from(b_max)])),
                )
            } else {
                None
            };
            let config = SimulateConfig {
                matrix,
                n,
                alpha: args.alpha.or(file.as_ref().and_then(|c| c.alpha)),
                dist,
                mean: args.mean.or(file.as_ref().and_then(|c| c.mean)),
                std_dev: args.std_dev.or(file.as_ref().and_then(|c| c.std_dev)),
                p: args.p.or(file.as_ref().and_then(|c| c.p)),
                t_max: args
                    .t_max
                    .or(file.as_ref().map(|c| c.t_max))
                    .unwrap_or(1000),
                trials: args
                    .trials
                    .or(file.as_ref().map(|c| c.trials))
                    .unwrap_or(1000),
                b_max,
                delay_mode,
                delay_seed,
                seed,
                format: resolve_format(&args.common.format, file.as_ref().map(|c| c.format))?,
            };
            Ok((
                ExperimentConfig::Simulate(config),
                RunOptions {
                    out: args.common.out,
                    threads: args.common.threads,
                },
            ))
        }
        Command::Ramanujan(args) => {
            let file = match load_config_file(&args.common, "ramanujan")? {
                Some(ExperimentConfig::Ramanujan(c)) => Some(c),
                Some(_) => unreachable!("tag checked"),
                None => None,
            };
            let config = RamanujanConfig {
                n: args.n.or(file.as_ref().map(|c| c.n)).unwrap_or(16),
                d: args.d.or(file.as_ref().map(|c| c.d)).unwrap_or(3),
                max_attempts: args
                    .max_attempts
                    .or(file.as_ref().map(|c| c.max_attempts))
                    .unwrap_or(100),
                seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.seed))
                    .unwrap_or(0),
                format: resolve_format(&args.common.format, file.as_ref().map(|c| c.format))?,
            };
            Ok((
                ExperimentConfig::Ramanujan(config),
                RunOptions {
                    out: args.common.out,
                    threads: args.common.threads,
                },
            ))
        }
        Command::Tradeoff(args) => {
            let file = match load_config_file(&args.common, "tradeoff")? {
                Some(ExperimentConfig::Tradeoff(c)) => Some(c),
                Some(_) => unreachable!("tag checked"),
                None => None,
            };
            let n = args.n.or(file.as_ref().map(|c| c.n)).unwrap_or(200);
            let betas = match &args.betas {
                Some(list) => parse_f64_list(list).map_err(CliError::config)?,
                None => file
                    .as_ref()
                    .map(|c| c.betas.clone())
                    .unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0]),
            };
            let config = TradeoffConfig {
                n,
                d_min: args.d_min.or(file.as_ref().map(|c| c.d_min)).unwrap_or(3),
                d_max: args
                    .d_max
                    .or(file.as_ref().map(|c| c.d_max))
                    .unwrap_or(n.saturating_sub(1)),
                betas,
                repeats: args
                    .repeats
                    .or(file.as_ref().map(|c| c.repeats))
                    .unwrap_or(1),
                seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.seed))
                    .unwrap_or(0),
                format: resolve_format(&args.common.format, file.as_ref().map(|c| c.format))?,
            };
            Ok((
                ExperimentConfig::Tradeoff(config),
                RunOptions {
                    out: args.common.out,
                    threads: args.common.threads,
                },
            ))
        }
        Command::Budget(args) => {
            let file = match load_config_file(&args.common, "budget")? {
                Some(ExperimentConfig::Budget(c)) => Some(c),
                Some(_) => unreachable!("tag checked"),
                None => None,
            };
            let config = BudgetConfig {
                total: args
                    .total
                    .or(file.as_ref().map(|c| c.total))
                    .unwrap_or(100_000_000),
                threshold: args
                    .threshold
                    .or(file.as_ref().map(|c| c.threshold))
                    .unwrap_or(0.99),
                n_min: args.n_min.or(file.as_ref().map(|c| c.n_min)).unwrap_or(100),
                n_max: args
                    .n_max
                    .or(file.as_ref().map(|c| c.n_max))
                    .unwrap_or(2000),
                n_step: args
                    .n_step
                    .or(file.as_ref().map(|c| c.n_step))
                    .unwrap_or(10),
                d_cap: args
                    .d_cap
                    .or(file.as_ref().map(|c| c.d_cap))
                    .unwrap_or(gossip_mean::tradeoff::DEFAULT_D_CAP),
                seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.seed))
                    .unwrap_or(0),
                format: resolve_format(&args.common.format, file.as_ref().map(|c| c.format))?,
            };
            Ok((
                ExperimentConfig::Budget(config),
                RunOptions {
                    out: args.common.out,
                    threads: args.common.threads,
                },
            ))
        }
    }
}
