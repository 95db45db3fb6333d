use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lattice_waves::experiments::{self, Config, Scenario};

/// Runs one scenario and writes its artifacts under `--out`.
#[derive(Parser, Debug)]
#[command(name = "lattice-waves", version)]
struct Cli {
    /// wave-scan, spectral, correctors, residuals, stability, spreading, obstacle or comparison
    scenario: Scenario,
    /// Configuration file (see configs/)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `section.key=value`, applied after the file
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the default configuration and exit
    #[arg(long)]
    print_defaults: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_defaults {
        print!("{}", cli.scenario.template());
        return ExitCode::SUCCESS;
    }
    let result = Config::from_file(cli.scenario.schema(), &cli.config, &cli.overrides)
        .and_then(|cfg| experiments::run(cli.scenario, &cfg, &cli.out));
    match result {
        Ok(report) => {
            for c in &report.checks {
                println!("{}", c.line());
            }
            for n in &report.notes {
                println!("note: {n}");
            }
            println!("{}: {}", report.scenario, if report.passed { "PASS" } else { "FAIL" });
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
