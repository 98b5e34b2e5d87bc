//! `seqsqueeze`: compress, generate, verify, benchmark and compare token
//! sequences stored as `.npy` float32 matrices.
//!
//! Exit status: 0 success, 1 verification mismatch, 2 bad arguments or
//! configuration, 3 I/O or file format errors (including non-finite or empty
//! input), 4 keep ratio not realisable by the method.

mod args;
mod cmd;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "seqsqueeze", version, about = "Token-sequence compression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress one array file.
    Compress(cmd::compress::CompressArgs),
    /// Write a seeded synthetic array plus a sidecar describing it.
    Gen(cmd::gen::GenArgs),
    /// Check the engine against the float64 reference on one input.
    Verify(cmd::verify::VerifyArgs),
    /// Time the compression kernels on a seeded input.
    Bench(cmd::bench::BenchArgs),
    /// Compare two method configurations over a corpus.
    Compare(cmd::compare::CompareArgs),
    /// Run the jobs listed in a JSON manifest.
    Batch(cmd::batch::BatchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compress(a) => cmd::compress::run(&a),
        Command::Gen(a) => cmd::gen::run(&a),
        Command::Verify(a) => cmd::verify::run(&a),
        Command::Bench(a) => cmd::bench::run(&a),
        Command::Compare(a) => cmd::compare::run(&a),
        Command::Batch(a) => cmd::batch::run(&a),
    };
    match result {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("seqsqueeze: {e}");
            e.status.into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Status;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(Status::Ok as u8, 0);
        assert_eq!(Status::Mismatch as u8, 1);
        assert_eq!(Status::Usage as u8, 2);
        assert_eq!(Status::Io as u8, 3);
        assert_eq!(Status::Budget as u8, 4);
    }
}
