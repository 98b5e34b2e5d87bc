use serde::{Deserialize, Serialize};

use crate::sequence::{KeepRatio, Method, Weighting, Window};

/// One source-to-destination merge, in the parity indexing of its pass.
///
/// `source` and `destination` are 1-based: source `i` is the token at odd
/// position `2i - 1` of the pass input, destination `j` the token at `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    #[serde(rename = "i")]
    pub source: usize,
    #[serde(rename = "j")]
    pub destination: usize,
    pub score: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergePass {
    pub input_length: usize,
    /// Representative positions of the sources, in parity order.
    pub sources: Vec<usize>,
    /// Representative positions of the destinations, in parity order.
    pub destinations: Vec<usize>,
    /// Sorted by source index.
    pub merges: Vec<MergeRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergeTrace {
    pub passes: Vec<MergePass>,
}

impl MergeTrace {
    pub fn is_empty(&self) -> bool {
        self.passes.is_empty()
    }

    pub fn merge_count(&self) -> usize {
        self.passes.iter().map(|p| p.merges.len()).sum()
    }

    /// First merge record (pass index, record) that breaks `window`.
    pub fn window_violation(&self, window: Window) -> Option<(usize, MergeRecord)> {
        self.passes.iter().enumerate().find_map(|(p, pass)| {
            pass.merges
                .iter()
                .find(|m| !window.admits(m.source, m.destination))
                .map(|m| (p, *m))
        })
    }

    /// Rebuilds a trace from bare merge records by replaying them over
    /// `original_length` singleton tokens. Returns the trace and the final
    /// groups, or a description of the first inconsistency.
    pub fn replay(
        original_length: usize,
        merges_per_pass: Vec<Vec<MergeRecord>>,
    ) -> Result<(MergeTrace, Vec<Vec<usize>>), String> {
        let mut groups: Vec<Vec<usize>> = (1..=original_length).map(|p| vec![p]).collect();
        let mut passes = Vec::with_capacity(merges_per_pass.len());
        for (p, merges) in merges_per_pass.into_iter().enumerate() {
            let len = groups.len();
            if len < 2 {
                return Err(format!("pass {p}: sequence of length {len} cannot be split"));
            }
            if merges.is_empty() {
                return Err(format!("pass {p}: no merges"));
            }
            let n_src = len.div_ceil(2);
            let n_dst = len / 2;
            let mut target: Vec<Option<usize>> = vec![None; n_src];
            for m in &merges {
                if !(1..=n_src).contains(&m.source) || !(1..=n_dst).contains(&m.destination) {
                    return Err(format!(
                        "pass {p}: merge ({}, {}) outside {n_src}x{n_dst}",
                        m.source, m.destination
                    ));
                }
                if target[m.source - 1].replace(m.destination - 1).is_some() {
                    return Err(format!("pass {p}: source {} merged twice", m.source));
                }
            }
            let sources = (0..n_src).map(|i| groups[2 * i][0]).collect();
            let destinations = (0..n_dst).map(|j| groups[2 * j + 1][0]).collect();

            let mut next: Vec<Vec<usize>> = Vec::with_capacity(len - merges.len());
            let mut absorbed: Vec<Vec<usize>> = (0..n_dst).map(|j| groups[2 * j + 1].clone()).collect();
            for (i, t) in target.iter().enumerate() {
                match t {
                    Some(j) => absorbed[*j].extend_from_slice(&groups[2 * i]),
                    None => next.push(groups[2 * i].clone()),
                }
            }
            next.extend(absorbed.into_iter().map(|mut g| {
                g.sort_unstable();
                g
            }));
            next.sort_unstable_by_key(|g| g[0]);
            let mut merges = merges;
            merges.sort_by_key(|m| m.source);
            passes.push(MergePass {
                input_length: len,
                sources,
                destinations,
                merges,
            });
            groups = next;
        }
        Ok((MergeTrace { passes }, groups))
    }
}

/// Which input rows (1-based) make up each output token.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub method: Method,
    pub keep_ratio: KeepRatio,
    /// `None` for methods without a window.
    pub window: Option<Window>,
    pub weighting: Weighting,
    pub original_length: usize,
    /// Sorted groups, ordered by their smallest member.
    pub groups: Vec<Vec<usize>>,
    /// Rows discarded by the pruning methods; empty otherwise.
    pub dropped: Vec<usize>,
}

impl Provenance {
    pub fn output_length(&self) -> usize {
        self.groups.len()
    }

    pub fn identity(
        method: Method,
        keep_ratio: KeepRatio,
        window: Option<Window>,
        weighting: Weighting,
        len: usize,
    ) -> Self {
        Provenance {
            method,
            keep_ratio,
            window,
            weighting,
            original_length: len,
            groups: (1..=len).map(|p| vec![p]).collect(),
            dropped: Vec::new(),
        }
    }

    /// Checks that groups and dropped rows partition `1..=original_length`,
    /// each group is sorted, and representatives strictly increase.
    pub fn check(&self) -> Result<(), String> {
        let mut seen = vec![false; self.original_length];
        let mut last_rep = 0usize;
        for (k, g) in self.groups.iter().enumerate() {
            let Some(&rep) = g.first() else {
                return Err(format!("group {k} is empty"));
            };
            if !g.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("group {k} is not strictly sorted"));
            }
            if rep <= last_rep {
                return Err(format!("group {k} representative {rep} is out of order"));
            }
            last_rep = rep;
            for &p in g {
                mark(&mut seen, p).map_err(|e| format!("group {k}: {e}"))?;
            }
        }
        for &p in &self.dropped {
            mark(&mut seen, p).map_err(|e| format!("dropped: {e}"))?;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(format!("position {} is not covered", missing + 1));
        }
        Ok(())
    }
}

fn mark(seen: &mut [bool], p: usize) -> Result<(), String> {
    if p == 0 || p > seen.len() {
        return Err(format!("position {p} out of range 1..={}", seen.len()));
    }
    if std::mem::replace(&mut seen[p - 1], true) {
        return Err(format!("position {p} appears twice"));
    }
    Ok(())
}
