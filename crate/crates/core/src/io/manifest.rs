//! JSON run manifests for batch compression.
//!
//! ```json
//! {
//!   "overrides": { "keep_ratio": 0.25 },
//!   "jobs": [
//!     { "input": "a.npy", "output": "a.out.npy", "provenance": "a.prov.json",
//!       "method": "ltbm", "keep_ratio": 0.5, "window": 8 }
//!   ]
//! }
//! ```
//!
//! Fields set in `overrides` replace the per-job value for every job.
//! Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::sequence::{CompressionConfig, KeepRatio, Method, Weighting, Window, DEFAULT_SEGMENTS, DEFAULT_WINDOW};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub jobs: Vec<ManifestJob>,
    #[serde(default, skip_serializing_if = "ConfigOverrides::is_empty")]
    pub overrides: ConfigOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestJob {
    pub input: PathBuf,
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<PathBuf>,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub keep_ratio: Option<KeepRatio>,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub weighting: Option<Weighting>,
    #[serde(default)]
    pub segments: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep_ratio: Option<KeepRatio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighting: Option<Weighting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
}

impl ConfigOverrides {
    pub fn is_empty(&self) -> bool {
        *self == ConfigOverrides::default()
    }
}

/// A job with paths resolved and its configuration fully determined.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedJob {
    pub input: PathBuf,
    pub output: PathBuf,
    pub provenance: Option<PathBuf>,
    pub config: CompressionConfig,
}

impl RunManifest {
    /// Applies overrides and defaults and checks that every job's paths are
    /// non-empty and distinct, and that no two jobs write the same file.
    pub fn resolve(&self, base: &Path) -> Result<Vec<ResolvedJob>, FormatError> {
        let bad = |k: usize, msg: &str| FormatError::SchemaViolation(format!("job {}: {msg}", k + 1));
        let o = &self.overrides;
        let mut written = HashSet::new();
        let mut jobs = Vec::with_capacity(self.jobs.len());
        for (k, job) in self.jobs.iter().enumerate() {
            let method = o.method.or(job.method).ok_or_else(|| bad(k, "missing method"))?;
            let keep_ratio = o
                .keep_ratio
                .or(job.keep_ratio)
                .ok_or_else(|| bad(k, "missing keep_ratio"))?;
            let config = CompressionConfig::new(method, keep_ratio)
                .with_window(o.window.or(job.window).unwrap_or(Window::Bounded(DEFAULT_WINDOW)))
                .with_weighting(o.weighting.or(job.weighting).unwrap_or_default())
                .with_segments(o.segments.or(job.segments).unwrap_or(DEFAULT_SEGMENTS));

            let paths: Vec<&PathBuf> = [Some(&job.input), Some(&job.output), job.provenance.as_ref()]
                .into_iter()
                .flatten()
                .collect();
            if paths.iter().any(|p| p.as_os_str().is_empty()) {
                return Err(bad(k, "empty path"));
            }
            let resolved: Vec<PathBuf> = paths.iter().map(|p| base.join(p)).collect();
            if resolved.iter().collect::<HashSet<_>>().len() != resolved.len() {
                return Err(bad(k, "input, output and provenance paths must differ"));
            }
            for p in &resolved[1..] {
                if !written.insert(p.clone()) {
                    return Err(bad(k, &format!("{} is written by an earlier job", p.display())));
                }
            }
            let mut resolved = resolved.into_iter();
            jobs.push(ResolvedJob {
                input: resolved.next().unwrap(),
                output: resolved.next().unwrap(),
                provenance: resolved.next(),
                config,
            });
        }
        Ok(jobs)
    }
}

pub fn manifest_from_json(text: &str) -> Result<RunManifest, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::SchemaViolation(e.to_string()))
}

/// Reads a manifest and resolves it against the manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ResolvedJob>, FormatError> {
    let path = path.as_ref();
    let manifest = manifest_from_json(&fs::read_to_string(path)?)?;
    manifest.resolve(path.parent().unwrap_or(Path::new("")))
}
