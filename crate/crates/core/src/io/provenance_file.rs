//! JSON provenance files.
//!
//! ```text
//! {
//!   "method": "ltbm",
//!   "keep_ratio": 0.25,
//!   "window": 8,                 // integer, "unbounded", or null
//!   "weighting": "paper-literal",
//!   "original_length": 8,
//!   "output_length": 2,
//!   "groups": [[1, 2, 3, 4], [5, 6, 7, 8]],
//!   "dropped": [],
//!   "passes": [[{"i": 1, "j": 1, "score": 0.912345678}, ...], ...]
//! }
//! ```
//!
//! Groups and dropped rows are 1-based input positions. `passes[p]` lists the
//! merges of pass `p` in that pass's parity indexing; the per-pass layout is
//! rebuilt on read by replaying them. Scores carry 9 significant digits,
//! which round-trips float32 exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{write_atomic, FormatError};
use crate::provenance::{MergeRecord, MergeTrace, Provenance};
use crate::sequence::{KeepRatio, Method, Weighting, Window};

#[derive(Serialize)]
struct RecordOut {
    i: usize,
    j: usize,
    score: f64,
}

impl From<&MergeRecord> for RecordOut {
    fn from(m: &MergeRecord) -> Self {
        let score = format!("{:.8e}", m.score).parse().expect("formatted float parses");
        RecordOut {
            i: m.source,
            j: m.destination,
            score,
        }
    }
}

#[derive(Deserialize)]
struct ProvenanceIn {
    method: Method,
    keep_ratio: f64,
    window: Option<Window>,
    weighting: Weighting,
    original_length: usize,
    output_length: usize,
    groups: Vec<Vec<usize>>,
    #[serde(default)]
    dropped: Vec<usize>,
    passes: Vec<Vec<MergeRecord>>,
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

fn push_array<T>(out: &mut String, key: &str, items: &[T], render: impl Fn(&T) -> String, last: bool) {
    out.push_str(&format!("  \"{key}\": ["));
    for (k, item) in items.iter().enumerate() {
        out.push_str(if k == 0 { "\n    " } else { ",\n    " });
        out.push_str(&render(item));
    }
    if !items.is_empty() {
        out.push_str("\n  ");
    }
    out.push(']');
    out.push_str(if last { "\n" } else { ",\n" });
}

/// One group or pass per line, so fixtures diff cleanly.
pub fn provenance_to_json(prov: &Provenance, trace: &MergeTrace) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"method\": {},\n", json(&prov.method)));
    out.push_str(&format!("  \"keep_ratio\": {},\n", json(&prov.keep_ratio.get())));
    out.push_str(&format!("  \"window\": {},\n", json(&prov.window)));
    out.push_str(&format!("  \"weighting\": {},\n", json(&prov.weighting)));
    out.push_str(&format!("  \"original_length\": {},\n", prov.original_length));
    out.push_str(&format!("  \"output_length\": {},\n", prov.output_length()));
    push_array(&mut out, "groups", &prov.groups, json, false);
    out.push_str(&format!("  \"dropped\": {},\n", json(&prov.dropped)));
    push_array(
        &mut out,
        "passes",
        &trace.passes,
        |p| json(&p.merges.iter().map(RecordOut::from).collect::<Vec<_>>()),
        true,
    );
    out.push_str("}\n");
    out
}

pub fn provenance_from_json(text: &str) -> Result<(Provenance, MergeTrace), FormatError> {
    let raw: ProvenanceIn = serde_json::from_str(text).map_err(|e| FormatError::SchemaViolation(e.to_string()))?;
    let violation = |msg: String| FormatError::SchemaViolation(msg);

    let keep_ratio = KeepRatio::new(raw.keep_ratio).map_err(|e| violation(e.to_string()))?;
    if raw.output_length != raw.groups.len() {
        return Err(violation(format!(
            "output_length {} but {} groups",
            raw.output_length,
            raw.groups.len()
        )));
    }
    let prov = Provenance {
        method: raw.method,
        keep_ratio,
        window: raw.window,
        weighting: raw.weighting,
        original_length: raw.original_length,
        groups: raw.groups,
        dropped: raw.dropped,
    };
    prov.check().map_err(violation)?;

    if !raw.method.is_merge() && !raw.passes.is_empty() {
        return Err(violation(format!("{} does not record merge passes", raw.method)));
    }
    if raw.method.is_merge() && !prov.dropped.is_empty() {
        return Err(violation("merge methods drop no tokens".into()));
    }
    let trace = if raw.passes.is_empty() {
        if raw.method.is_merge() && prov.groups.len() != prov.original_length {
            return Err(violation("merged groups without any passes".into()));
        }
        MergeTrace::default()
    } else {
        let (trace, groups) = MergeTrace::replay(prov.original_length, raw.passes).map_err(violation)?;
        if groups != prov.groups {
            return Err(violation("passes do not reproduce the recorded groups".into()));
        }
        if let Some(window) = prov.window {
            if let Some((p, m)) = trace.window_violation(window) {
                return Err(violation(format!(
                    "pass {p}: merge ({}, {}) breaks window {window}",
                    m.source, m.destination
                )));
            }
        }
        trace
    };
    Ok((prov, trace))
}

pub fn write_provenance(prov: &Provenance, trace: &MergeTrace, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write_atomic(path.as_ref(), provenance_to_json(prov, trace).as_bytes())?;
    Ok(())
}

pub fn read_provenance(path: impl AsRef<Path>) -> Result<(Provenance, MergeTrace), FormatError> {
    provenance_from_json(&fs::read_to_string(path)?)
}
