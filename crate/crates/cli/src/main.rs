//! `qdg` — distinguishability geometry of qubit states from the command line.
//!
//! Seven subcommands cover entropy sweeps, metric ellipse fields, scalar
//! curvature tables, geodesics, measurement-strategy benchmarks, and seeded
//! sampling simulations.  Run `qdg --help` for the full option reference.

mod cli;
mod commands;
mod error;
mod output;

use clap::Parser;

use cli::{Cli, Command};
use error::AppError;

fn dispatch(command: &Command) -> Result<(), AppError> {
    match command {
        Command::SweepBeta(args) => commands::sweep_beta(args),
        Command::SweepTheta(args) => commands::sweep_theta(args),
        Command::EllipseField(args) => commands::ellipse_field_cmd(args),
        Command::Curvature(args) => commands::curvature(args),
        Command::Geodesic(args) => commands::geodesic(args),
        Command::Benchmark(args) => commands::benchmark(args),
        Command::Simulate(args) => commands::simulate(args),
    }
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let doc = serde_json::json!({
                "error": e.render().to_string().trim(),
                "kind": "usage",
            });
            eprintln!("{doc}");
            return 2;
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run());
}
