use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dpp_cli::{run_file, RunOptions, Suite};

#[derive(Parser)]
#[command(name = "dpp", version, about = "Double porosity/permeability flow and property checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and run its verification suites.
    Run {
        scenario: PathBuf,
        /// Suites to run instead of the scenario's list (uniqueness,
        /// reciprocity, variational, convergence).
        #[arg(long = "suite", value_parser = parse_suite, num_args = 1..)]
        suites: Vec<Suite>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Refinement levels of the convergence study.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Seed of the random suites; overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| format!("unknown suite '{s}'"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { scenario, suites, out, levels, seed } = cli.command;
    let opts = RunOptions { suites: (!suites.is_empty()).then_some(suites), out, levels, seed };
    ExitCode::from(run_file(&scenario, &opts) as u8)
}
