//! File formats: `.npy` v1.0 token matrices, JSON provenance records and
//! JSON run manifests.

mod manifest;
mod npy;
mod provenance_file;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

pub use manifest::{manifest_from_json, read_manifest, ConfigOverrides, ManifestJob, ResolvedJob, RunManifest};
pub use npy::{
    encode_array, read_array, read_array_from, read_array_with_cap, write_array, write_array_to, DEFAULT_PAYLOAD_CAP,
    NPY_MAGIC,
};
pub use provenance_file::{provenance_from_json, provenance_to_json, read_provenance, write_provenance};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("BadMagic: not an .npy file")]
    BadMagic,

    #[error("UnsupportedVersion: .npy version {0}.{1} (only 1.0 is accepted)")]
    UnsupportedVersion(u8, u8),

    #[error("MalformedHeader: {0}")]
    MalformedHeader(String),

    #[error("UnsupportedDtype: {0:?} (only '<f4' is accepted)")]
    UnsupportedDtype(String),

    #[error("UnsupportedRank: {0} dimensions (only 2 are accepted)")]
    UnsupportedRank(usize),

    #[error("UnsupportedLayout: Fortran-order arrays are not accepted")]
    FortranOrder,

    #[error("TooLarge: payload of {bytes} bytes exceeds the cap of {cap}")]
    TooLarge { bytes: u128, cap: usize },

    #[error("TruncatedPayload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("TrailingBytes: {0} unexpected bytes after the payload")]
    TrailingBytes(usize),

    #[error("SchemaViolation: {0}")]
    SchemaViolation(String),

    #[error("IoFailure: {0}")]
    Io(#[from] io::Error),
}

static TEMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(
        ".{}.{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
