use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use seqsqueeze::compress;
use seqsqueeze::io::{write_array, write_provenance};

use super::load_sequence;
use crate::args::MethodArgs;
use crate::error::{CliError, CliResult, Status};

#[derive(Args, Debug)]
pub struct CompressArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long)]
    pub output: PathBuf,

    #[command(flatten)]
    pub method: MethodArgs,

    /// Also write the JSON provenance record here.
    #[arg(long)]
    pub provenance: Option<PathBuf>,
}

/// Prints `method=..\tinput_len=..\toutput_len=..\tpasses=..\twall_us=..`.
/// `wall_us` covers reading, compressing and writing.
pub fn run(args: &CompressArgs) -> CliResult<Status> {
    let start = Instant::now();
    let config = args.method.config();
    config.validate()?;
    let seq = load_sequence(&args.input)?;
    let out = compress(&seq, &config)?;
    write_array(&out.sequence.to_matrix(), &args.output).map_err(|e| CliError::from(e).at(&args.output))?;
    if let Some(path) = &args.provenance {
        write_provenance(&out.provenance, &out.trace, path).map_err(|e| CliError::from(e).at(path))?;
    }
    println!(
        "method={}\tinput_len={}\toutput_len={}\tpasses={}\twall_us={}",
        config.method,
        seq.len(),
        out.sequence.len(),
        out.trace.passes.len(),
        start.elapsed().as_micros()
    );
    Ok(Status::Ok)
}
