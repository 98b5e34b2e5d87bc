use std::path::PathBuf;

use clap::{Args, ValueEnum};
use seqsqueeze::io::{write_array, write_atomic};
use seqsqueeze::testkit::{generate, EventParams, SynthSpec};

use crate::args::sidecar_path;
use crate::error::{CliError, CliResult, Status};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    IidGaussian,
    PiecewiseEvents,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long)]
    pub length: usize,

    #[arg(long)]
    pub dim: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = ProfileKind::IidGaussian)]
    pub profile: ProfileKind,

    /// Number of events (piecewise-events only).
    #[arg(long, default_value_t = 8)]
    pub events: usize,

    /// Mean event span in tokens (piecewise-events only).
    #[arg(long, default_value_t = 16)]
    pub mean_span: usize,

    /// Within-event jitter (piecewise-events only).
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,

    /// Spread of event centroids and background tokens (piecewise-events only).
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
}

impl GenArgs {
    fn spec(&self) -> SynthSpec {
        match self.profile {
            ProfileKind::IidGaussian => SynthSpec::gaussian(self.length, self.dim, self.seed),
            ProfileKind::PiecewiseEvents => SynthSpec::events(
                self.length,
                self.dim,
                self.seed,
                EventParams {
                    events: self.events,
                    mean_span: self.mean_span,
                    noise: self.noise,
                    separation: self.separation,
                },
            ),
        }
    }
}

/// Writes the array and `<stem>.synth.json` next to it.
pub fn run(args: &GenArgs) -> CliResult<Status> {
    let spec = args.spec();
    let seq = generate(&spec)?;
    write_array(&seq.to_matrix(), &args.out).map_err(|e| CliError::from(e).at(&args.out))?;
    let sidecar = sidecar_path(&args.out);
    let json = serde_json::to_string_pretty(&spec).expect("synth spec serializes");
    write_atomic(&sidecar, json.as_bytes()).map_err(|e| CliError::from(e).at(&sidecar))?;
    println!(
        "out={}\tlength={}\tdim={}\tseed={}\tprofile={}",
        args.out.display(),
        spec.length,
        spec.dim,
        spec.seed,
        args.profile
            .to_possible_value()
            .expect("no skipped variants")
            .get_name()
    );
    Ok(Status::Ok)
}
