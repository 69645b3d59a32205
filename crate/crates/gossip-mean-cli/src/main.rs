use clap::Parser;

fn main() {
    let parsed = gossip_mean_cli::cli::Cli::parse();
    if let Err(e) = gossip_mean_cli::run(parsed) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
