mod args;
mod commands;
mod error;
mod output;
mod schema;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        Some(0) => Err(CliError::Usage("thread count must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(()),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Dof(a) => commands::dof(a),
        Command::Select(a) => commands::select(a),
        Command::Compare(a) => commands::compare(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error[{}]: {e}", e.kind());
        std::process::exit(e.exit_code());
    }
}
