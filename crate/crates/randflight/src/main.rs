//! Command-line front end: `simulate` runs a config-driven ensemble and
//! writes its summary files, `verify` runs a named check suite. Exit codes
//! are stable: 0 success, 1 failed checks or runtime errors, 2 usage and
//! config errors.

use clap::{Parser, Subcommand};
use randflight::config::ExperimentConfig;
use randflight::verify::Suite;
use randflight::{experiment, verify, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "randflight",
    version,
    about = "Simulate conservative random walks with inhomogeneous Poisson turn clocks \
             and verify the engine against its closed-form laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ensemble described by a JSON config and write its outputs.
    Simulate {
        /// Path to the experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Worker pool size; falls back to RANDFLIGHT_THREADS, then to
        /// machine parallelism. Results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run one of the named check suites and print its table.
    Verify {
        /// rates, ppp, directions, geometry, mathkit, or all.
        #[arg(long)]
        suite: String,
        /// Cut Monte Carlo effort tenfold; error thresholds are recomputed
        /// from the smaller counts.
        #[arg(long)]
        quick: bool,
    },
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("RANDFLIGHT_THREADS").ok()?.parse().ok())
}

fn run(cli: Cli) -> randflight::Result<bool> {
    match cli.command {
        Command::Simulate { config, threads } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = experiment::run_ensemble(&cfg, thread_count(threads))?;
            experiment::write_outputs(&cfg, &summary)?;
            println!(
                "wrote {} replica reports and summary tables to {}",
                summary.replicas,
                cfg.outputs.display()
            );
            Ok(true)
        }
        Command::Verify { suite, quick } => {
            let suite: Suite = suite.parse()?;
            let report = verify::run_suite(suite, quick)?;
            print!("{}", report.render());
            Ok(report.all_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::Json(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
