//! Experiment runner around the `gossip-mean` library: configuration
//! parsing, orchestration, and tabular/structured output.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use crate::config::OutputFormat;
use error::CliError;
use std::io::Write;

/// Resolves, executes, and writes one experiment.
pub fn run(parsed: cli::Cli) -> Result<(), CliError> {
    let (config, options) = cli::resolve(parsed)?;
    if let Some(threads) = options.threads {
        // Ignore failure: the global pool may already exist.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let format = config.format();
    let output = commands::run(config)?;
    let text = match format {
        OutputFormat::Csv => output.to_csv(),
        OutputFormat::Structured => output.to_structured(),
    };
    match &options.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
