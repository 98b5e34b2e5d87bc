use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use seqsqueeze::{CompressionConfig, KeepRatio, Method, Weighting, Window, DEFAULT_SEGMENTS};

/// Method configuration shared by compress and verify.
#[derive(Args, Debug, Clone)]
pub struct MethodArgs {
    /// ltbm, global-merge, uniavg, global-topk or segmentwise-topk.
    #[arg(long)]
    pub method: Method,

    /// Fraction of tokens to keep, in (0, 1].
    #[arg(long)]
    pub keep_ratio: KeepRatio,

    /// Temporal window for ltbm, or "unbounded".
    #[arg(long, default_value = "8")]
    pub window: Window,

    /// paper-literal or size-weighted.
    #[arg(long, default_value = "paper-literal")]
    pub weighting: Weighting,

    /// Segment count for segmentwise-topk.
    #[arg(long, default_value_t = DEFAULT_SEGMENTS)]
    pub segments: usize,
}

impl MethodArgs {
    pub fn config(&self) -> CompressionConfig {
        CompressionConfig::new(self.method, self.keep_ratio)
            .with_window(self.window)
            .with_weighting(self.weighting)
            .with_segments(self.segments)
    }
}

/// A method with optional `key=value` settings, written
/// `METHOD[:key=value,...]`, e.g. `ltbm:window=16,weighting=size-weighted`.
/// Keys: keep_ratio, window, weighting, segments. Unset keys take the
/// command's defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub keep_ratio: Option<KeepRatio>,
    pub window: Option<Window>,
    pub weighting: Option<Weighting>,
    pub segments: Option<usize>,
}

impl MethodSpec {
    pub fn config(&self, default_ratio: KeepRatio) -> CompressionConfig {
        CompressionConfig::new(self.method, self.keep_ratio.unwrap_or(default_ratio))
            .with_window(self.window.unwrap_or(Window::Bounded(seqsqueeze::DEFAULT_WINDOW)))
            .with_weighting(self.weighting.unwrap_or_default())
            .with_segments(self.segments.unwrap_or(DEFAULT_SEGMENTS))
    }

    /// Compact label for report rows.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(r) = self.keep_ratio {
            parts.push(format!("keep_ratio={r}"));
        }
        if let Some(w) = self.window {
            parts.push(format!("window={w}"));
        }
        if let Some(w) = self.weighting {
            parts.push(format!("weighting={w}"));
        }
        if let Some(s) = self.segments {
            parts.push(format!("segments={s}"));
        }
        if parts.is_empty() {
            self.method.to_string()
        } else {
            format!("{}:{}", self.method, parts.join(","))
        }
    }
}

impl FromStr for MethodSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut spec = MethodSpec {
            method: name.parse().map_err(|e| format!("{e}"))?,
            keep_ratio: None,
            window: None,
            weighting: None,
            segments: None,
        };
        for setting in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = setting
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {setting:?}"))?;
            let err = |e: &dyn std::fmt::Display| format!("{key}: {e}");
            match key.trim() {
                "keep_ratio" | "keep-ratio" => spec.keep_ratio = Some(value.parse().map_err(|e| err(&e))?),
                "window" => spec.window = Some(value.parse().map_err(|e| err(&e))?),
                "weighting" => spec.weighting = Some(value.parse().map_err(|e| err(&e))?),
                "segments" => spec.segments = Some(value.trim().parse().map_err(|e| err(&e))?),
                other => return Err(format!("unknown setting {other:?}")),
            }
        }
        Ok(spec)
    }
}

/// Sidecar holding the generator settings of a synthetic array.
pub fn sidecar_path(array: &Path) -> PathBuf {
    array.with_extension("synth.json")
}
