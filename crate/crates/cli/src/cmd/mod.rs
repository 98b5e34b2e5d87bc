pub mod batch;
pub mod bench;
pub mod compare;
pub mod compress;
pub mod gen;
pub mod verify;

use std::path::Path;

use seqsqueeze::io::read_array;
use seqsqueeze::{validate_sequence, TokenSequence};

use crate::error::{CliError, CliResult};

/// Reads and validates an input array; every failure names the file.
pub fn load_sequence(path: &Path) -> CliResult<TokenSequence> {
    let raw = read_array(path).map_err(|e| CliError::from(e).at(path))?;
    validate_sequence(raw).map_err(|e| CliError::from(e).at(path))
}
