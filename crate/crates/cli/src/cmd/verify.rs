use std::path::PathBuf;

use clap::Args;
use seqsqueeze::compress;
use seqsqueeze::testkit::{compare, oracle_compress, Mismatch, ORACLE_MAX_LEN};

use super::load_sequence;
use crate::args::MethodArgs;
use crate::error::{CliError, CliResult, Status};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[command(flatten)]
    pub method: MethodArgs,

    /// Largest accepted per-component difference from the reference.
    #[arg(long, default_value_t = 1e-5)]
    pub oracle_tolerance: f64,
}

/// Checks in the order they are evaluated.
const CHECKS: [&str; 5] = ["length", "groups", "dropped", "passes", "values"];

fn failed_check(m: &Mismatch) -> usize {
    match m {
        Mismatch::Length { .. } => 0,
        Mismatch::Group { .. } => 1,
        Mismatch::Dropped { .. } => 2,
        Mismatch::PassCount { .. } | Mismatch::Merge { .. } => 3,
        Mismatch::Component { .. } => 4,
    }
}

/// Prints one `check=..\tresult=..` line per check; checks after the first
/// failure are reported as `skipped`.
pub fn run(args: &VerifyArgs) -> CliResult<Status> {
    let config = args.method.config();
    config.validate()?;
    if args.oracle_tolerance.is_nan() || args.oracle_tolerance < 0.0 {
        return Err(CliError::usage("--oracle-tolerance must be a non-negative number"));
    }
    let seq = load_sequence(&args.input)?;
    if seq.len() > ORACLE_MAX_LEN {
        return Err(CliError::usage(format!(
            "input has {} tokens; the reference handles at most {ORACLE_MAX_LEN}",
            seq.len()
        )));
    }

    let (engine, oracle) = match (compress(&seq, &config), oracle_compress(&seq, &config)) {
        (Ok(e), Ok(o)) => (e, o),
        (Err(e), Err(o)) if e == o => {
            println!("check=config\tresult=rejected\tdetail={e}");
            return Err(e.into());
        }
        (e, o) => {
            let e = e.err().map_or_else(|| "ok".to_string(), |e| e.to_string());
            let o = o.err().map_or_else(|| "ok".to_string(), |e| e.to_string());
            println!("check=config\tresult=mismatch\tdetail=engine: {e}; oracle: {o}");
            return Ok(Status::Mismatch);
        }
    };

    let outcome = compare(&engine, &oracle, args.oracle_tolerance);
    let failed = outcome.as_ref().err().map(failed_check);
    for (k, name) in CHECKS.iter().enumerate() {
        match (failed, &outcome) {
            (Some(f), Err(m)) if f == k => println!("check={name}\tresult=mismatch\tdetail={m}"),
            (Some(f), _) if f < k => println!("check={name}\tresult=skipped"),
            _ => println!("check={name}\tresult=ok"),
        }
    }
    Ok(if outcome.is_ok() { Status::Ok } else { Status::Mismatch })
}
