#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;

// Argument parsing and flag resolution must never panic. Inputs mentioning
// --config are skipped after parsing so the harness stays off the
// filesystem.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.iter().any(|t| t.contains("--config")) {
        return;
    }
    let args = std::iter::once("gossip-mean").chain(tokens.into_iter());
    if let Ok(parsed) = gossip_mean_cli::cli::Cli::try_parse_from(args) {
        let _ = gossip_mean_cli::cli::resolve(parsed);
    }
});
