use std::process::ExitCode;

use clap::Parser;
use holosim_cli::{run, Cli, Outcome};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            match &outcome {
                Outcome::Table { csv, table } => {
                    println!("wrote {} rows to {}", table.rows.len(), csv.display());
                }
                Outcome::Report { json, report } => {
                    for c in &report.checks {
                        let observed = c.observed.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"));
                        let status = if c.passed { "ok  " } else { "FAIL" };
                        println!("{status} {:<42} observed {observed:>10}  tolerance {:.0e}", c.name, c.tolerance);
                    }
                    println!("report written to {}", json.display());
                }
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("holosim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
