mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::GenData(a) => commands::gen_data(a),
        Command::Train(a) => commands::train_cmd(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::GateCount(a) => commands::gate_count(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
