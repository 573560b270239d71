//! Command-line front-end for `adaptive-cf`: `pca`, `recommend` and `bench`
//! subcommands writing TOML reports and CSV side files.

pub mod args;
pub mod bench;
pub mod error;
pub mod input;
pub mod pca;
pub mod recommend;
pub mod report;

use std::path::PathBuf;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};
pub use report::RunReport;

/// Runs a parsed command. `command` is echoed into the reports.
pub fn run(cli: &Cli, command: &str) -> CliResult<String> {
    match &cli.command {
        Command::Pca(args) => {
            let r = pca::run_pca(args, command)?;
            Ok(format!(
                "k = {}, relative residual = {:.6}, wrote {}",
                r.k,
                r.relative_residual.unwrap_or(f64::NAN),
                args.out.display()
            ))
        }
        Command::Recommend(args) => {
            let r = recommend::run_recommend(args, command)?;
            Ok(format!(
                "k = {}, validation MAE = {:.4}, test MAE = {:.4}, wrote {}",
                r.k,
                r.validation_mae.unwrap_or(f64::NAN),
                r.test_mae.unwrap_or(f64::NAN),
                args.out.display()
            ))
        }
        Command::Bench(args) => {
            let config = bench::BenchConfig::load(&args.config)?;
            let out = args
                .out
                .clone()
                .or_else(|| config.out.clone())
                .unwrap_or_else(|| PathBuf::from("bench-out"));
            let summary = bench::run_bench(&config, &out, args.parallel)?;
            let mut msg = format!(
                "{} cells completed, {} failed, wrote {}",
                summary.completed,
                summary.failed,
                out.display()
            );
            for cell in summary.cells.iter().filter(|c| c.error.is_some()) {
                msg.push_str(&format!("\n  {} failed: {}", cell.id, cell.error.as_deref().unwrap_or("")));
            }
            Ok(msg)
        }
    }
}
