// SPDX-License-Identifier: Apache-2.0

//! The `dce` command line front end: `run`, `scan`, `compare` and `validate`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O failure.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{compare, run, scan, validate, GlobalOptions, Report};
pub use config::{build_scenario, load_scenario, parse_scenario, Scenario, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "dce", version, about = "Bogoliubov transformations of a scalar field in a cavity with moving walls")]
pub struct Cli {
    /// Worker threads for method runs and scans (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Directory for output files; overrides output.dir of the scenario.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Overrides every tolerance of the scenario; for compare, the largest accepted difference.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the methods of a scenario and write transforms, spectra and a manifest.
    Run { config: PathBuf },
    /// Evaluate the resonance scan of a scenario.
    Scan { config: PathBuf },
    /// Compare the transforms recorded by two manifests.
    Compare { manifest_a: PathBuf, manifest_b: PathBuf },
    /// Check a scenario and report every violation.
    Validate { config: PathBuf },
}

impl Cli {
    pub fn options(&self) -> GlobalOptions {
        GlobalOptions { workers: self.workers, out_dir: self.out_dir.clone(), tolerance: self.tolerance }
    }

    pub fn execute(&self) -> crate::Result<Report> {
        let options = self.options();
        match &self.command {
            Command::Run { config } => run(config, &options),
            Command::Scan { config } => scan(config, &options),
            Command::Compare { manifest_a, manifest_b } => compare(manifest_a, manifest_b, &options),
            Command::Validate { config } => validate(config, &options),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.execute() {
        Ok(report) => {
            print!("{}", report.stdout);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
