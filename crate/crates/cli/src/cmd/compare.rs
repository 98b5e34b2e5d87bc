use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use seqsqueeze::io::read_manifest;
use seqsqueeze::testkit::{event_retention, Profile, SynthSpec};
use seqsqueeze::{compress, Compressed, CompressionConfig, KeepRatio, TokenSequence};

use super::load_sequence;
use crate::args::{sidecar_path, MethodSpec};
use crate::error::{CliError, CliResult, Status};

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Directory of `.npy` files, or a JSON run manifest whose job inputs
    /// form the corpus.
    #[arg(long)]
    pub input: PathBuf,

    /// First configuration, `METHOD[:key=value,...]`.
    #[arg(long)]
    pub left: MethodSpec,

    /// Second configuration, `METHOD[:key=value,...]`.
    #[arg(long)]
    pub right: MethodSpec,

    /// Keep ratio for configurations that do not set their own.
    #[arg(long, default_value = "0.5")]
    pub keep_ratio: KeepRatio,
}

const HEADER: &str =
    "file\tlength\tleft_len\tright_len\tleft_sizes\tright_sizes\tleft_retention\tright_retention\tdistance";

/// Group-size histogram, size -> count.
type Histogram = BTreeMap<usize, usize>;

struct Row {
    length: usize,
    lens: [usize; 2],
    sizes: [Histogram; 2],
    retention: Option<[f64; 2]>,
    distance: Option<f64>,
}

/// Prints a `#left=..\tright=..` line, then a tab-separated table with one
/// row per file and a final `TOTAL` row. Columns:
///
/// * `left_sizes`/`right_sizes`: group-size histogram as `size:count` pairs
///   joined by `;`.
/// * `*_retention`: event retention, `-` when the file has no event sidecar.
///   The total is the mean over files that have one.
/// * `distance`: Frobenius norm of the difference of the two outputs, `-`
///   when their shapes differ. The total is the norm over all files.
pub fn run(args: &CompareArgs) -> CliResult<Status> {
    let configs = [args.left.config(args.keep_ratio), args.right.config(args.keep_ratio)];
    for config in &configs {
        config.validate()?;
    }
    let files = corpus(&args.input)?;
    if files.is_empty() {
        return Err(CliError::io(format!("{}: no .npy files found", args.input.display())));
    }

    println!("#left={}\tright={}", args.left.label(), args.right.label());
    println!("{HEADER}");
    let mut rows = Vec::with_capacity(files.len());
    for file in &files {
        let row = compare_file(file, &configs)?;
        println!("{}\t{}", file.display(), format_row(&row));
        rows.push(row);
    }
    println!("TOTAL\t{}", format_row(&total(&rows)));
    Ok(Status::Ok)
}

fn corpus(input: &Path) -> CliResult<Vec<PathBuf>> {
    if input.is_dir() {
        let mut files = Vec::new();
        for entry in fs::read_dir(input).map_err(|e| CliError::from(e).at(input))? {
            let path = entry.map_err(|e| CliError::from(e).at(input))?.path();
            if path.is_file() && path.extension().is_some_and(|x| x == "npy") {
                files.push(path);
            }
        }
        files.sort();
        Ok(files)
    } else {
        let jobs = read_manifest(input).map_err(|e| CliError::from(e).at(input))?;
        let mut files: Vec<PathBuf> = Vec::with_capacity(jobs.len());
        for job in jobs {
            if !files.contains(&job.input) {
                files.push(job.input);
            }
        }
        Ok(files)
    }
}

fn compare_file(file: &Path, configs: &[CompressionConfig; 2]) -> CliResult<Row> {
    let seq = load_sequence(file)?;
    let run = |c: &CompressionConfig| compress(&seq, c).map_err(|e| CliError::from(e).at(file));
    let outs = [run(&configs[0])?, run(&configs[1])?];
    let retention = match read_sidecar(file)? {
        Some(spec) if matches!(spec.profile, Profile::PiecewiseEvents(_)) => {
            let r = |out: &Compressed| {
                event_retention(&seq, &out.provenance, &spec).map_err(|e| CliError::io(e.to_string()).at(file))
            };
            Some([r(&outs[0])?, r(&outs[1])?])
        }
        _ => None,
    };
    Ok(Row {
        length: seq.len(),
        lens: [outs[0].sequence.len(), outs[1].sequence.len()],
        sizes: [histogram(&outs[0]), histogram(&outs[1])],
        retention,
        distance: frobenius(&outs[0].sequence, &outs[1].sequence),
    })
}

fn read_sidecar(file: &Path) -> CliResult<Option<SynthSpec>> {
    let path = sidecar_path(file);
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::from(e).at(&path))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::io(format!("SchemaViolation: {e}")).at(&path))
}

fn histogram(out: &Compressed) -> Histogram {
    let mut h = Histogram::new();
    for g in &out.provenance.groups {
        *h.entry(g.len()).or_default() += 1;
    }
    h
}

fn frobenius(a: &TokenSequence, b: &TokenSequence) -> Option<f64> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return None;
    }
    let sum: f64 = a
        .as_flat()
        .iter()
        .zip(b.as_flat())
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum();
    Some(sum.sqrt())
}

fn total(rows: &[Row]) -> Row {
    let mut sizes = [Histogram::new(), Histogram::new()];
    for row in rows {
        for (acc, h) in sizes.iter_mut().zip(&row.sizes) {
            for (&size, &count) in h {
                *acc.entry(size).or_default() += count;
            }
        }
    }
    let with_events: Vec<[f64; 2]> = rows.iter().filter_map(|r| r.retention).collect();
    let retention = (!with_events.is_empty()).then(|| {
        let n = with_events.len() as f64;
        [0, 1].map(|k| with_events.iter().map(|r| r[k]).sum::<f64>() / n)
    });
    let distance = rows
        .iter()
        .map(|r| r.distance.map(|d| d * d))
        .sum::<Option<f64>>()
        .map(f64::sqrt);
    Row {
        length: rows.iter().map(|r| r.length).sum(),
        lens: [0, 1].map(|k| rows.iter().map(|r| r.lens[k]).sum()),
        sizes,
        retention,
        distance,
    }
}

fn format_row(row: &Row) -> String {
    let hist = |h: &Histogram| {
        h.iter()
            .map(|(size, count)| format!("{size}:{count}"))
            .collect::<Vec<_>>()
            .join(";")
    };
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        row.length,
        row.lens[0],
        row.lens[1],
        hist(&row.sizes[0]),
        hist(&row.sizes[1]),
        opt(row.retention.map(|r| r[0])),
        opt(row.retention.map(|r| r[1])),
        opt(row.distance)
    )
}
