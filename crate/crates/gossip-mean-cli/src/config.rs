//! Resolved experiment configurations.
//!
//! Every run embeds its fully resolved config in its output; feeding that
//! JSON back through `--config` reproduces the run. Precedence: explicit
//! command-line flags override config-file values override built-in
//! defaults.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Which communication matrix to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixSpec {
    Identity,
    /// `(1/N) 11^T`, the saturated network.
    Full,
    A1,
    A2,
    A3,
    HAlpha,
}

impl FromStr for MatrixSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "id" => Ok(Self::Identity),
            "full" | "a0" => Ok(Self::Full),
            "a1" => Ok(Self::A1),
            "a2" => Ok(Self::A2),
            "a3" | "star" => Ok(Self::A3),
            "h-alpha" | "halpha" => Ok(Self::HAlpha),
            other => Err(err(format!(
                "unknown matrix '{other}' (expected identity|full|a1|a2|a3|h-alpha)"
            ))),
        }
    }
}

impl fmt::Display for MatrixSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Identity => "identity",
            Self::Full => "full",
            Self::A1 => "a1",
            Self::A2 => "a2",
            Self::A3 => "a3",
            Self::HAlpha => "h-alpha",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Structured,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "structured" | "json" => Ok(Self::Structured),
            other => Err(err(format!(
                "unknown format '{other}' (expected csv|structured)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    Uniform01,
    Gaussian,
    Bernoulli,
}

impl FromStr for SourceSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform01" | "uniform" => Ok(Self::Uniform01),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "bernoulli" => Ok(Self::Bernoulli),
            other => Err(err(format!(
                "unknown distribution '{other}' (expected uniform01|gaussian|bernoulli)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMode {
    /// Every link delayed by exactly `b_max`.
    Constant,
    /// Seeded uniform delays in `{0..b_max}` on the support.
    Random,
}

impl FromStr for DelayMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "constant" => Ok(Self::Constant),
            "random" => Ok(Self::Random),
            other => Err(err(format!(
                "unknown delay mode '{other}' (expected constant|random)"
            ))),
        }
    }
}

/// A fully resolved experiment, tagged by subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Analyze(AnalyzeConfig),
    Simulate(SimulateConfig),
    Ramanujan(RamanujanConfig),
    Tradeoff(TradeoffConfig),
    Budget(BudgetConfig),
}

impl ExperimentConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            Self::Analyze(_) => "analyze",
            Self::Simulate(_) => "simulate",
            Self::Ramanujan(_) => "ramanujan",
            Self::Tradeoff(_) => "tradeoff",
            Self::Budget(_) => "budget",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Self::Analyze(c) => c.seed,
            Self::Simulate(c) => c.seed,
            Self::Ramanujan(c) => c.seed,
            Self::Tradeoff(c) => c.seed,
            Self::Budget(c) => c.seed,
        }
    }

    pub fn format(&self) -> OutputFormat {
        match self {
            Self::Analyze(c) => c.format,
            Self::Simulate(c) => c.format,
            Self::Ramanujan(c) => c.format,
            Self::Tradeoff(c) => c.format,
            Self::Budget(c) => c.format,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub matrix: MatrixSpec,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub t_grid: Vec<u64>,
    pub seed: u64,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub matrix: MatrixSpec,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub dist: SourceSpec,
    /// Gaussian mean (ignored otherwise).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean: Option<f64>,
    /// Gaussian standard deviation (ignored otherwise).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_dev: Option<f64>,
    /// Bernoulli success probability (ignored otherwise).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    pub t_max: u64,
    pub trials: u64,
    /// Zero runs the synchronous model.
    pub b_max: u32,
    pub delay_mode: DelayMode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delay_seed: Option<u64>,
    pub seed: u64,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanujanConfig {
    pub n: usize,
    pub d: usize,
    pub max_attempts: usize,
    pub seed: u64,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConfig {
    pub n: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub betas: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub total: u64,
    pub threshold: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub n_step: usize,
    pub d_cap: usize,
    pub seed: u64,
    pub format: OutputFormat,
}

/// Parses a comma-separated list of unsigned integers.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>, ConfigError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| err(format!("'{part}' is not an unsigned integer")))
        })
        .collect()
}

/// Parses a comma-separated list of reals.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|part| {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| err(format!("'{part}' is not a number")))?;
            if !v.is_finite() {
                return Err(err(format!("'{part}' must be finite")));
            }
            Ok(v)
        })
        .collect()
}

/// Parses a config file into an [`ExperimentConfig`].
pub fn parse_config_file(bytes: &[u8]) -> Result<ExperimentConfig, ConfigError> {
    serde_json::from_slice(bytes).map_err(|e| err(format!("config file: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_names_parse() {
        assert_eq!("a1".parse::<MatrixSpec>().unwrap(), MatrixSpec::A1);
        assert_eq!("A0".parse::<MatrixSpec>().unwrap(), MatrixSpec::Full);
        assert_eq!("h-alpha".parse::<MatrixSpec>().unwrap(), MatrixSpec::HAlpha);
        assert!("a9".parse::<MatrixSpec>().is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_u64_list("1, 10,100").unwrap(), vec![1, 10, 100]);
        assert!(parse_u64_list("1,x").is_err());
        assert_eq!(parse_f64_list("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_f64_list("inf").is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = ExperimentConfig::Analyze(AnalyzeConfig {
            matrix: MatrixSpec::A2,
            n: 10,
            alpha: None,
            t_grid: vec![1, 10, 100],
            seed: 7,
            format: OutputFormat::Csv,
        });
        let text = serde_json::to_string(&config).unwrap();
        let back = parse_config_file(text.as_bytes()).unwrap();
        assert_eq!(back, config);
        assert_eq!(back.command_name(), "analyze");
    }

    #[test]
    fn config_file_rejects_garbage() {
        assert!(parse_config_file(b"{\"command\":\"nope\"}").is_err());
        assert!(parse_config_file(b"not json").is_err());
    }
}
