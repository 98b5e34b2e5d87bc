use clap::Args;
use seqsqueeze::bench::time_kernel;
use seqsqueeze::testkit::{generate, SynthSpec};
use seqsqueeze::{compress, CompressionConfig, KeepRatio, Method, Weighting, Window, DEFAULT_SEGMENTS};

use crate::error::{CliError, CliResult, Status};

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 750)]
    pub length: usize,

    #[arg(long, default_value_t = 1280)]
    pub dim: usize,

    #[arg(long, default_value = "0.5")]
    pub keep_ratio: KeepRatio,

    /// Comma-separated methods to time.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "ltbm,global-merge,uniavg,global-topk,segmentwise-topk"
    )]
    pub methods: Vec<Method>,

    #[arg(long, default_value_t = 30)]
    pub repeats: usize,

    /// Untimed runs before the timed repeats.
    #[arg(long, default_value_t = 3)]
    pub warmup: usize,

    /// Seed of the iid Gaussian input.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "8")]
    pub window: Window,

    #[arg(long, default_value = "paper-literal")]
    pub weighting: Weighting,

    #[arg(long, default_value_t = DEFAULT_SEGMENTS)]
    pub segments: usize,
}

/// Prints a tab-separated table `method L D rho median_us p90_us`, one row
/// per method. A method that cannot realise the keep ratio reports
/// `unavailable` in both timing columns.
pub fn run(args: &BenchArgs) -> CliResult<Status> {
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    let configs: Vec<CompressionConfig> = args
        .methods
        .iter()
        .map(|&m| {
            CompressionConfig::new(m, args.keep_ratio)
                .with_window(args.window)
                .with_weighting(args.weighting)
                .with_segments(args.segments)
        })
        .collect();
    for config in &configs {
        config.validate()?;
    }
    let seq = generate(&SynthSpec::gaussian(args.length, args.dim, args.seed))?;

    println!("method\tL\tD\trho\tmedian_us\tp90_us");
    for config in &configs {
        let row = format!("{}\t{}\t{}\t{}", config.method, args.length, args.dim, args.keep_ratio);
        match compress(&seq, config) {
            Err(e) if e.is_budget_error() => {
                println!("{row}\tunavailable\tunavailable");
                continue;
            }
            Err(e) => return Err(e.into()),
            Ok(_) => {}
        }
        let stats = time_kernel(args.warmup, args.repeats, || compress(&seq, config));
        println!("{row}\t{:.1}\t{:.1}", stats.median_us, stats.p90_us);
    }
    Ok(Status::Ok)
}
