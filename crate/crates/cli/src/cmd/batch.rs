use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use seqsqueeze::compress;
use seqsqueeze::io::{read_manifest, write_array, write_provenance, ResolvedJob};

use super::load_sequence;
use crate::error::{CliError, CliResult, Status};

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// JSON run manifest.
    #[arg(long)]
    pub manifest: PathBuf,

    /// Maximum number of jobs run at once. Defaults to the number of CPUs.
    #[arg(long, env = "SEQSQUEEZE_JOBS")]
    pub jobs: Option<usize>,
}

struct JobReport {
    input_len: usize,
    output_len: usize,
    passes: usize,
}

fn run_job(job: &ResolvedJob) -> CliResult<JobReport> {
    job.config.validate()?;
    let seq = load_sequence(&job.input)?;
    let out = compress(&seq, &job.config).map_err(|e| CliError::from(e).at(&job.input))?;
    write_array(&out.sequence.to_matrix(), &job.output).map_err(|e| CliError::from(e).at(&job.output))?;
    if let Some(path) = &job.provenance {
        write_provenance(&out.provenance, &out.trace, path).map_err(|e| CliError::from(e).at(path))?;
    }
    Ok(JobReport {
        input_len: seq.len(),
        output_len: out.sequence.len(),
        passes: out.trace.passes.len(),
    })
}

/// Runs every job and prints one line per job in manifest order. Failed jobs
/// do not stop the others; the exit status is that of the first failed job.
pub fn run(args: &BatchArgs) -> CliResult<Status> {
    let threads = match args.jobs {
        Some(0) => return Err(CliError::usage("--jobs must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let jobs = read_manifest(&args.manifest).map_err(|e| CliError::from(e).at(&args.manifest))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {threads} workers: {e}")))?;
    let results: Vec<CliResult<JobReport>> = pool.install(|| jobs.par_iter().map(run_job).collect());

    let mut status = Status::Ok;
    for (k, (job, result)) in jobs.iter().zip(results).enumerate() {
        let head = format!(
            "job={}\tinput={}\toutput={}\tmethod={}",
            k + 1,
            job.input.display(),
            job.output.display(),
            job.config.method
        );
        match result {
            Ok(r) => println!(
                "{head}\tinput_len={}\toutput_len={}\tpasses={}\tstatus=ok",
                r.input_len, r.output_len, r.passes
            ),
            Err(e) => {
                println!("{head}\tstatus=error\texit={}", e.status as u8);
                eprintln!("seqsqueeze: job {}: {e}", k + 1);
                if status == Status::Ok {
                    status = e.status;
                }
            }
        }
    }
    Ok(status)
}
