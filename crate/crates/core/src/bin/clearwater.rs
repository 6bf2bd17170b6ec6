//! Command-line interface for the underwater restoration pipeline.
//!
//! ```text
//! clearwater restore photo.jpg
//! clearwater restore photo.jpg -o clear.png --report clear.json
//! clearwater restore dive_folder --batch -c tuned.conf
//! ```
//!
//! Exit codes: `0` success, `1` unreadable input or unsupported format,
//! `2` batch finished with some per-file failures, `3` configuration
//! error, `4` solver divergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use clearwater::config::{self, PipelineConfig};
use clearwater::pipeline::{run_batch, run_single};
use clearwater::Error;

#[derive(Parser)]
#[command(
    name = "clearwater",
    version,
    about = "Restores color-cast, low-contrast underwater photographs",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore one image, or every image in a directory with --batch.
    Restore {
        /// Input image (PNG/JPEG), or a directory with --batch.
        input: PathBuf,
        /// Output path: the restored PNG, or the output directory in
        /// batch mode. Defaults to the input location with a suffix.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Configuration file (one `key = value` per line).
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Write a JSON report: metrics and solver traces for a single
        /// image, rows and failures for a batch.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the per-stage intermediate images.
        #[arg(long)]
        dump_intermediates: bool,
        /// Treat the input as a directory and restore every image in it.
        #[arg(long)]
        batch: bool,
    },
}

/// Maps library errors onto the documented exit codes.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } => 3,
        Error::SolverDiverged { .. } => 4,
        _ => 1,
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<PipelineConfig, Error> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            config::parse(&text)
        }
    }
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Restore {
            input,
            output,
            config,
            report,
            dump_intermediates,
            batch,
        } => {
            let cfg = load_config(config.as_ref())?;
            if batch {
                let outcome = run_batch(
                    &input,
                    output.as_deref(),
                    report.as_deref(),
                    dump_intermediates,
                    &cfg,
                )?;
                for w in &outcome.warnings {
                    eprintln!("warning: {w}");
                }
                for (path, message) in &outcome.failures {
                    eprintln!("failed: {}: {message}", path.display());
                }
                println!(
                    "restored {} image(s), {} failure(s); summary at {}",
                    outcome.rows.len(),
                    outcome.failures.len(),
                    outcome.csv_path.display()
                );
                Ok(if outcome.failures.is_empty() { 0 } else { 2 })
            } else {
                let outcome = run_single(
                    &input,
                    output.as_deref(),
                    report.as_deref(),
                    dump_intermediates,
                    &cfg,
                )?;
                for w in &outcome.warnings {
                    eprintln!("warning: {w}");
                }
                let iterations = outcome
                    .reports
                    .iter()
                    .map(|r| r.iterations)
                    .max()
                    .unwrap_or(0);
                println!(
                    "wrote {} (entropy {:.4}, uciqe {:.4}, delta_e {:.4}, iterations {})",
                    outcome.output_path.display(),
                    outcome.metrics.entropy,
                    outcome.metrics.uciqe,
                    outcome.metrics.ciede2000.unwrap_or(0.0),
                    iterations
                );
                Ok(0)
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
