mod args;
mod commands;
mod failure;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::Failure;

fn run(cli: Cli) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(Failure::internal)?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Eval(a) => commands::eval(a),
        Command::Attrs(a) => commands::attrs(a),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STVSTD_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
