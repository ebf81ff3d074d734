//! Loads a spec file, runs its tasks and writes a deterministic report.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails or errors,
//! 2 when the spec cannot be read or does not match the schema.

mod report;
mod spec;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use fdcstar::Tol;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use report::{Report, TaskRecord};
use tasks::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(
    version,
    about = "Verify index-theory identities for inclusions of finite-dimensional C*-algebras"
)]
struct Args {
    /// Spec file (JSON).
    spec: PathBuf,
    /// Absolute tolerance for every identity residual.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Seed for randomized searches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Default number of tower levels for `tower` and `depth` tasks.
    #[arg(long, default_value_t = 2)]
    max_tower: usize,
    /// Largest projected matrix dimension a tower level may reach.
    #[arg(long, default_value_t = 4096)]
    gns_cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run independent tasks in parallel; the report keeps task order.
    #[arg(long)]
    parallel: bool,
    /// Record wall-clock time per task (makes the report non-reproducible).
    #[arg(long)]
    timings: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(report) => {
            let text = match args.format {
                Format::Text => report.to_text(),
                Format::Structured => report.to_json(),
            };
            let written = match &args.output {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Ok(()) if report.passes() => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(args: &Args) -> Result<Report, String> {
    if !(args.tolerance > 0.0 && args.tolerance.is_finite()) {
        return Err(format!(
            "tolerance must be positive, got {}",
            args.tolerance
        ));
    }
    let bytes = std::fs::read(&args.spec).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let spec = spec::parse(text).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let tol = Tol::with_eq(args.tolerance);
    let cfg = RunConfig {
        seed: args.seed,
        max_tower: args.max_tower,
        gns_cap: args.gns_cap,
    };
    let run_one = |(k, job): (usize, &spec::Job)| -> TaskRecord {
        let start = Instant::now();
        let mut rec = tasks::run(k, job, &tol, &cfg);
        if args.timings {
            rec.elapsed_s = Some(start.elapsed().as_secs_f64());
        }
        rec
    };
    let records: Vec<TaskRecord> = if args.parallel {
        spec.jobs.par_iter().enumerate().map(run_one).collect()
    } else {
        spec.jobs.iter().enumerate().map(run_one).collect()
    };
    Ok(Report::new(digest, args.seed, args.tolerance, records))
}
