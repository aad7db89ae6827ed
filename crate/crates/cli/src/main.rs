use clap::Parser;
use noisy_consensus_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = noisy_consensus_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
