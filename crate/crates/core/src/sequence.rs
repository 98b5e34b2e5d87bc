use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CompressError;

/// Default temporal window for [`Method::Ltbm`].
pub const DEFAULT_WINDOW: usize = 8;

/// Default segment count for [`Method::SegmentwiseTopK`].
pub const DEFAULT_SEGMENTS: usize = 8;

/// A dense row-major float32 matrix with no validity guarantees.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix payload does not match its shape");
        Matrix { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// An `L x D` token matrix with per-token position and size metadata.
///
/// `positions[k]` is the smallest original (1-based) position folded into
/// token `k`, and `counts[k]` is how many original tokens it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    data: Vec<f32>,
    dim: usize,
    positions: Vec<usize>,
    counts: Vec<usize>,
}

/// Checks a raw matrix and wraps it as a fresh sequence (positions `1..=L`,
/// every count 1).
pub fn validate_sequence(raw: Matrix) -> Result<TokenSequence, CompressError> {
    if raw.rows == 0 || raw.cols == 0 {
        return Err(CompressError::EmptyInput {
            rows: raw.rows,
            cols: raw.cols,
        });
    }
    if let Some(idx) = raw.data.iter().position(|v| !v.is_finite()) {
        return Err(CompressError::NonFiniteInput {
            row: idx / raw.cols,
            col: idx % raw.cols,
        });
    }
    Ok(TokenSequence {
        positions: (1..=raw.rows).collect(),
        counts: vec![1; raw.rows],
        data: raw.data,
        dim: raw.cols,
    })
}

impl TokenSequence {
    pub fn from_flat(data: Vec<f32>, len: usize, dim: usize) -> Result<Self, CompressError> {
        if data.len() != len * dim {
            return Err(CompressError::DimensionMismatch {
                expected: len * dim,
                found: data.len(),
            });
        }
        validate_sequence(Matrix {
            rows: len,
            cols: dim,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self, CompressError> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(CompressError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        validate_sequence(Matrix {
            rows: rows.len(),
            cols: dim,
            data,
        })
    }

    /// Assembles a sequence from already-validated parts. Callers guarantee
    /// finiteness and the metadata invariants.
    pub(crate) fn from_parts(data: Vec<f32>, dim: usize, positions: Vec<usize>, counts: Vec<usize>) -> Self {
        debug_assert_eq!(data.len(), dim * positions.len());
        debug_assert_eq!(positions.len(), counts.len());
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(data.iter().all(|v| v.is_finite()));
        TokenSequence {
            data,
            dim,
            positions,
            counts,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// Always false for a validated sequence; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.len(),
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn into_matrix(self) -> Matrix {
        Matrix {
            rows: self.positions.len(),
            cols: self.dim,
            data: self.data,
        }
    }
}

/// Fraction of the token budget to keep, in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KeepRatio(f64);

impl KeepRatio {
    pub const FULL: KeepRatio = KeepRatio(1.0);

    pub fn new(value: f64) -> Result<Self, CompressError> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(KeepRatio(value))
        } else {
            Err(CompressError::InvalidConfig(format!(
                "keep ratio must lie in (0, 1], got {value}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_full(self) -> bool {
        self.0 == 1.0
    }

    pub fn target_length(self, len: usize) -> usize {
        target_length(self, len)
    }
}

impl TryFrom<f64> for KeepRatio {
    type Error = CompressError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        KeepRatio::new(value)
    }
}

impl From<KeepRatio> for f64 {
    fn from(value: KeepRatio) -> f64 {
        value.0
    }
}

impl fmt::Display for KeepRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for KeepRatio {
    type Err = CompressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: f64 = s
            .trim()
            .parse()
            .map_err(|_| CompressError::InvalidConfig(format!("not a number: {s:?}")))?;
        KeepRatio::new(value)
    }
}

/// `max(1, round(rho * L))`, rounding half away from zero and clamped to `L`.
pub fn target_length(keep_ratio: KeepRatio, len: usize) -> usize {
    let rounded = (keep_ratio.0 * len as f64).round() as usize;
    rounded.clamp(1, len.max(1))
}

/// Maximum allowed gap `|i - j|` between source and destination parity
/// indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Bounded(usize),
    Unbounded,
}

impl Window {
    #[inline]
    pub fn admits(self, i: usize, j: usize) -> bool {
        match self {
            Window::Bounded(w) => i.abs_diff(j) <= w,
            Window::Unbounded => true,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Bounded(w) => write!(f, "{w}"),
            Window::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl FromStr for Window {
    type Err = CompressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "unbounded" | "inf" | "global" => Ok(Window::Unbounded),
            other => other
                .parse()
                .map(Window::Bounded)
                .map_err(|_| CompressError::InvalidConfig(format!("bad window: {s:?}"))),
        }
    }
}

impl Serialize for Window {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Window::Bounded(w) => serializer.serialize_u64(*w as u64),
            Window::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(w) => Ok(Window::Bounded(w as usize)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ltbm,
    GlobalMerge,
    #[serde(rename = "uniavg")]
    UniAvg,
    #[serde(rename = "global-topk")]
    GlobalTopK,
    #[serde(rename = "segmentwise-topk")]
    SegmentwiseTopK,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ltbm,
        Method::GlobalMerge,
        Method::UniAvg,
        Method::GlobalTopK,
        Method::SegmentwiseTopK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ltbm => "ltbm",
            Method::GlobalMerge => "global-merge",
            Method::UniAvg => "uniavg",
            Method::GlobalTopK => "global-topk",
            Method::SegmentwiseTopK => "segmentwise-topk",
        }
    }

    pub fn is_merge(self) -> bool {
        matches!(self, Method::Ltbm | Method::GlobalMerge)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CompressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| CompressError::InvalidConfig(format!("unknown method: {s:?}")))
    }
}

/// How a merged destination is averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Unweighted mean of the destination and its merged sources, pass by pass.
    #[default]
    PaperLiteral,
    /// Mean weighted by constituent counts, so every output token is the exact
    /// mean of the original tokens it covers.
    SizeWeighted,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::PaperLiteral => "paper-literal",
            Weighting::SizeWeighted => "size-weighted",
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Weighting {
    type Err = CompressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "paper-literal" => Ok(Weighting::PaperLiteral),
            "size-weighted" => Ok(Weighting::SizeWeighted),
            other => Err(CompressError::InvalidConfig(format!("unknown weighting: {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionConfig {
    pub method: Method,
    pub keep_ratio: KeepRatio,
    /// Only consulted by [`Method::Ltbm`]; Global Merge is always unbounded.
    pub window: Window,
    pub weighting: Weighting,
    /// Only consulted by [`Method::SegmentwiseTopK`].
    pub segments: usize,
}

impl CompressionConfig {
    pub fn new(method: Method, keep_ratio: KeepRatio) -> Self {
        CompressionConfig {
            method,
            keep_ratio,
            window: Window::Bounded(DEFAULT_WINDOW),
            weighting: Weighting::PaperLiteral,
            segments: DEFAULT_SEGMENTS,
        }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn with_segments(mut self, segments: usize) -> Self {
        self.segments = segments;
        self
    }

    pub fn validate(&self) -> Result<(), CompressError> {
        if self.segments == 0 {
            return Err(CompressError::InvalidConfig("segment count must be at least 1".into()));
        }
        Ok(())
    }

    /// The window the merge engine actually runs with.
    pub fn effective_window(&self) -> Option<Window> {
        match self.method {
            Method::Ltbm => Some(self.window),
            Method::GlobalMerge => Some(Window::Unbounded),
            _ => None,
        }
    }
}
