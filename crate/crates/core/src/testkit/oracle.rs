//! Reference implementation of every method, written for obviousness rather
//! than speed. Everything is f64 and plain loops; nothing here calls into
//! the engine modules.

#![allow(clippy::needless_range_loop)]

use std::fmt;

use crate::compress::Compressed;
use crate::error::CompressError;
use crate::sequence::{CompressionConfig, Method, TokenSequence, Weighting, Window};

/// Inputs longer than this are refused (the merge oracle is cubic).
pub const ORACLE_MAX_LEN: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub rows: Vec<Vec<f64>>,
    pub groups: Vec<Vec<usize>>,
    pub dropped: Vec<usize>,
    /// Per pass, `(i, j, score)` with 1-based parity indices, ascending `i`.
    pub passes: Vec<Vec<(usize, usize, f64)>>,
}

struct Token {
    v: Vec<f64>,
    group: Vec<usize>,
    count: f64,
}

fn budget(rho: f64, len: usize) -> usize {
    let t = (rho * len as f64).round();
    if t < 1.0 {
        1
    } else if t > len as f64 {
        len
    } else {
        t as usize
    }
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for k in 0..a.len() {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    let den = aa.sqrt() * bb.sqrt();
    ab / if den > 1e-12 { den } else { 1e-12 }
}

fn l2(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x * x;
    }
    s.sqrt()
}

pub fn oracle_compress(seq: &TokenSequence, config: &CompressionConfig) -> Result<OracleOutput, CompressError> {
    let n = seq.len();
    if n > ORACLE_MAX_LEN {
        return Err(CompressError::OracleTooLarge {
            len: n,
            limit: ORACLE_MAX_LEN,
        });
    }
    if config.segments == 0 {
        return Err(CompressError::InvalidConfig("segment count must be at least 1".into()));
    }
    let x: Vec<Vec<f64>> = (0..n).map(|r| seq.row(r).iter().map(|&v| v as f64).collect()).collect();
    let rho = config.keep_ratio.get();
    if rho == 1.0 {
        return Ok(OracleOutput {
            rows: x,
            groups: (1..=n).map(|p| vec![p]).collect(),
            dropped: vec![],
            passes: vec![],
        });
    }
    match config.method {
        Method::Ltbm => merge(&x, rho, config.window, config.weighting),
        Method::GlobalMerge => merge(&x, rho, Window::Unbounded, config.weighting),
        Method::UniAvg => uniavg(&x, rho),
        Method::GlobalTopK => {
            let scores: Vec<f64> = x.iter().map(|v| l2(v)).collect();
            let keep = top_indices(&scores, &(0..n).collect::<Vec<_>>(), budget(rho, n));
            Ok(pruned(&x, keep))
        }
        Method::SegmentwiseTopK => Ok(segmentwise(&x, rho, config.segments)),
    }
}

fn merge(x: &[Vec<f64>], rho: f64, window: Window, weighting: Weighting) -> Result<OracleOutput, CompressError> {
    let target = budget(rho, x.len());
    let mut cur: Vec<Token> = x
        .iter()
        .enumerate()
        .map(|(k, v)| Token {
            v: v.clone(),
            group: vec![k + 1],
            count: 1.0,
        })
        .collect();
    let mut passes = Vec::new();

    while cur.len() > target {
        let len = cur.len();
        let n_src = len.div_ceil(2);
        let n_dst = len / 2;

        // Each source's best destination: first maximum over the window.
        let mut best: Vec<Option<(usize, f64)>> = Vec::new();
        for i in 0..n_src {
            let mut b: Option<(usize, f64)> = None;
            for j in 0..n_dst {
                let gap = i.abs_diff(j);
                let allowed = match window {
                    Window::Bounded(w) => gap <= w,
                    Window::Unbounded => true,
                };
                if !allowed {
                    continue;
                }
                let s = cos(&cur[2 * i].v, &cur[2 * j + 1].v);
                let better = match b {
                    None => true,
                    Some((_, old)) => s > old,
                };
                if better {
                    b = Some((j, s));
                }
            }
            best.push(b);
        }

        // Take the highest-scoring sources one at a time.
        let candidates = best.iter().filter(|b| b.is_some()).count();
        let r = (len - target).min(candidates);
        if r == 0 {
            return Err(CompressError::CannotReachTarget { current: len, target });
        }
        let mut taken = vec![false; n_src];
        for _ in 0..r {
            let mut pick: Option<usize> = None;
            for i in 0..n_src {
                if taken[i] || best[i].is_none() {
                    continue;
                }
                pick = match pick {
                    None => Some(i),
                    Some(p) if best[i].unwrap().1 > best[p].unwrap().1 => Some(i),
                    keep => keep,
                };
            }
            taken[pick.unwrap()] = true;
        }

        let mut records = Vec::new();
        let mut into: Vec<Vec<usize>> = vec![Vec::new(); n_dst];
        for i in 0..n_src {
            if taken[i] {
                let (j, s) = best[i].unwrap();
                into[j].push(i);
                records.push((i + 1, j + 1, s));
            }
        }
        passes.push(records);

        let mut next: Vec<Token> = Vec::new();
        for i in 0..n_src {
            if !taken[i] {
                let t = &cur[2 * i];
                next.push(Token {
                    v: t.v.clone(),
                    group: t.group.clone(),
                    count: t.count,
                });
            }
        }
        for j in 0..n_dst {
            let d = &cur[2 * j + 1];
            let mut group = d.group.clone();
            let mut count = d.count;
            let mut v = d.v.clone();
            if !into[j].is_empty() {
                let wd = match weighting {
                    Weighting::PaperLiteral => 1.0,
                    Weighting::SizeWeighted => d.count,
                };
                let mut total = wd;
                for k in 0..v.len() {
                    v[k] *= wd;
                }
                for &i in &into[j] {
                    let s = &cur[2 * i];
                    let ws = match weighting {
                        Weighting::PaperLiteral => 1.0,
                        Weighting::SizeWeighted => s.count,
                    };
                    total += ws;
                    for k in 0..v.len() {
                        v[k] += ws * s.v[k];
                    }
                    group.extend(s.group.iter().copied());
                    count += s.count;
                }
                for k in 0..v.len() {
                    v[k] /= total;
                }
                group.sort();
            }
            next.push(Token { v, group, count });
        }
        next.sort_by(|a, b| a.group[0].cmp(&b.group[0]));
        cur = next;
    }

    Ok(OracleOutput {
        rows: cur.iter().map(|t| t.v.clone()).collect(),
        groups: cur.into_iter().map(|t| t.group).collect(),
        dropped: vec![],
        passes,
    })
}

fn uniavg(x: &[Vec<f64>], rho: f64) -> Result<OracleOutput, CompressError> {
    let k = (1.0 / rho).round() as usize;
    if k < 2 {
        return Err(CompressError::UnavailableRatio {
            keep_ratio: rho,
            factor: k,
        });
    }
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    let mut start = 0;
    while start < x.len() {
        let end = if start + k < x.len() { start + k } else { x.len() };
        let mut v = vec![0.0; x[0].len()];
        for r in start..end {
            for c in 0..v.len() {
                v[c] += x[r][c];
            }
        }
        for c in 0..v.len() {
            v[c] /= (end - start) as f64;
        }
        rows.push(v);
        groups.push((start + 1..=end).collect());
        start = end;
    }
    Ok(OracleOutput {
        rows,
        groups,
        dropped: vec![],
        passes: vec![],
    })
}

/// The `count` best of `indices` by score, ties to the smaller index, by
/// repeated linear scans.
fn top_indices(scores: &[f64], indices: &[usize], count: usize) -> Vec<usize> {
    let mut taken = vec![false; indices.len()];
    let mut out = Vec::new();
    for _ in 0..count {
        let mut pick: Option<usize> = None;
        for (k, &i) in indices.iter().enumerate() {
            if taken[k] {
                continue;
            }
            if pick.is_none() || scores[i] > scores[indices[pick.unwrap()]] {
                pick = Some(k);
            }
        }
        taken[pick.unwrap()] = true;
        out.push(indices[pick.unwrap()]);
    }
    out
}

fn pruned(x: &[Vec<f64>], mut keep: Vec<usize>) -> OracleOutput {
    keep.sort();
    let dropped = (0..x.len()).filter(|i| !keep.contains(i)).map(|i| i + 1).collect();
    OracleOutput {
        rows: keep.iter().map(|&i| x[i].clone()).collect(),
        groups: keep.iter().map(|&i| vec![i + 1]).collect(),
        dropped,
        passes: vec![],
    }
}

fn segmentwise(x: &[Vec<f64>], rho: f64, segments: usize) -> OracleOutput {
    let n = x.len();
    let target = budget(rho, n);
    let scores: Vec<f64> = x.iter().map(|v| l2(v)).collect();
    let nseg = if segments < n { segments } else { n };

    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut at = 0;
    for s in 0..nseg {
        let size = n / nseg + if s < n % nseg { 1 } else { 0 };
        members.push((at..at + size).collect());
        at += size;
    }

    // Largest remainder: floor shares, then +1 by remainder (ties: earlier).
    let mut quota: Vec<usize> = members.iter().map(|m| target * m.len() / n).collect();
    let mut rem: Vec<usize> = members.iter().map(|m| target * m.len() % n).collect();
    let assigned: usize = quota.iter().sum();
    for _ in 0..target - assigned {
        let mut pick = 0;
        for s in 1..nseg {
            if rem[s] > rem[pick] {
                pick = s;
            }
        }
        quota[pick] += 1;
        rem[pick] = 0;
    }
    // Clamp and hand any excess to the segment with the best unkept token.
    let mut excess = 0;
    for s in 0..nseg {
        if quota[s] > members[s].len() {
            excess += quota[s] - members[s].len();
            quota[s] = members[s].len();
        }
    }
    for _ in 0..excess {
        let mut pick: Option<(usize, usize)> = None;
        for s in 0..nseg {
            if quota[s] == members[s].len() {
                continue;
            }
            let order = top_indices(&scores, &members[s], quota[s] + 1);
            let cand = order[quota[s]];
            let better = match pick {
                None => true,
                Some((_, c)) => scores[cand] > scores[c] || (scores[cand] == scores[c] && cand < c),
            };
            if better {
                pick = Some((s, cand));
            }
        }
        quota[pick.unwrap().0] += 1;
    }

    let mut keep = Vec::new();
    for s in 0..nseg {
        keep.extend(top_indices(&scores, &members[s], quota[s]));
    }
    pruned(x, keep)
}

/// First disagreement between engine and oracle output.
#[derive(Debug, Clone, PartialEq)]
pub enum Mismatch {
    Length {
        engine: usize,
        oracle: usize,
    },
    Group {
        index: usize,
        engine: Vec<usize>,
        oracle: Vec<usize>,
    },
    Dropped {
        engine: Vec<usize>,
        oracle: Vec<usize>,
    },
    PassCount {
        engine: usize,
        oracle: usize,
    },
    Merge {
        pass: usize,
        index: usize,
        engine: (usize, usize, f64),
        oracle: (usize, usize, f64),
    },
    Component {
        token: usize,
        component: usize,
        engine: f32,
        oracle: f64,
    },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Length { engine, oracle } => write!(f, "length: engine {engine}, oracle {oracle}"),
            Mismatch::Group { index, engine, oracle } => {
                write!(f, "group {}: engine {engine:?}, oracle {oracle:?}", index + 1)
            }
            Mismatch::Dropped { engine, oracle } => write!(f, "dropped: engine {engine:?}, oracle {oracle:?}"),
            Mismatch::PassCount { engine, oracle } => write!(f, "passes: engine {engine}, oracle {oracle}"),
            Mismatch::Merge {
                pass,
                index,
                engine,
                oracle,
            } => write!(
                f,
                "pass {} merge {}: engine {engine:?}, oracle {oracle:?}",
                pass + 1,
                index + 1
            ),
            Mismatch::Component {
                token,
                component,
                engine,
                oracle,
            } => write!(
                f,
                "token {} component {}: engine {engine:e}, oracle {oracle:e}, diff {:e}",
                token + 1,
                component + 1,
                (*engine as f64 - oracle).abs()
            ),
        }
    }
}

/// Compares structure exactly and values within `tolerance` per component.
/// Merge scores are stored as f32, so they also get half an f32 ulp.
pub fn compare(engine: &Compressed, oracle: &OracleOutput, tolerance: f64) -> Result<(), Mismatch> {
    let seq = &engine.sequence;
    if seq.len() != oracle.rows.len() {
        return Err(Mismatch::Length {
            engine: seq.len(),
            oracle: oracle.rows.len(),
        });
    }
    for (index, (e, o)) in engine.provenance.groups.iter().zip(&oracle.groups).enumerate() {
        if e != o {
            return Err(Mismatch::Group {
                index,
                engine: e.clone(),
                oracle: o.clone(),
            });
        }
    }
    if engine.provenance.dropped != oracle.dropped {
        return Err(Mismatch::Dropped {
            engine: engine.provenance.dropped.clone(),
            oracle: oracle.dropped.clone(),
        });
    }
    if engine.trace.passes.len() != oracle.passes.len() {
        return Err(Mismatch::PassCount {
            engine: engine.trace.passes.len(),
            oracle: oracle.passes.len(),
        });
    }
    for (pass, (ep, op)) in engine.trace.passes.iter().zip(&oracle.passes).enumerate() {
        let n = ep.merges.len().max(op.len());
        for index in 0..n {
            let e = ep.merges.get(index).map(|m| (m.source, m.destination, m.score as f64));
            let o = op.get(index).copied();
            let same = match (e, o) {
                (Some(e), Some(o)) => {
                    e.0 == o.0
                        && e.1 == o.1
                        && (e.2 - o.2).abs() <= tolerance + o.2.abs() * f64::from(f32::EPSILON) / 2.0
                }
                _ => false,
            };
            if !same {
                return Err(Mismatch::Merge {
                    pass,
                    index,
                    engine: e.unwrap_or((0, 0, f64::NAN)),
                    oracle: o.unwrap_or((0, 0, f64::NAN)),
                });
            }
        }
    }
    for (token, o) in oracle.rows.iter().enumerate() {
        for (component, (&e, &o)) in seq.row(token).iter().zip(o).enumerate() {
            let diff = (e as f64 - o).abs();
            if diff.is_nan() || diff > tolerance {
                return Err(Mismatch::Component {
                    token,
                    component,
                    engine: e,
                    oracle: o,
                });
            }
        }
    }
    Ok(())
}
