use std::process::ExitCode;

use bfm_ot::args::{Cli, Command};
use bfm_ot::commands::{cmd_benchmark, cmd_interpolate, cmd_solve, configure_threads};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = configure_threads(cli.threads).and_then(|()| match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("bfm-ot: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
