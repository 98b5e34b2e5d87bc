//! Bipartite merging with an optional temporal window.
//!
//! One pass splits the current sequence by parity (odd positions are
//! sources, even positions destinations), scores every admissible
//! source/destination pair by cosine similarity, lets each source pick its
//! best destination, and merges the highest-scoring sources. All similarities
//! in a pass are computed from the pass input. Passes repeat until the target
//! length is reached.
//!
//! Tie-breaking is fixed: equal similarities go to the smallest destination
//! index, equal best scores to the smallest source index.

use std::cmp::Ordering;

use crate::error::CompressError;
use crate::provenance::{MergePass, MergeRecord, MergeTrace};
use crate::sequence::{target_length, KeepRatio, TokenSequence, Weighting, Window};
use crate::similarity::{similarity_table, PairMask, ScoreTable};

/// Current-sequence indices (0-based) of the sources and destinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParitySplit {
    pub sources: Vec<usize>,
    pub destinations: Vec<usize>,
}

impl ParitySplit {
    pub fn len(&self) -> usize {
        self.sources.len() + self.destinations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}

pub fn parity_split(seq: &TokenSequence) -> Result<ParitySplit, CompressError> {
    split_len(seq.len())
}

fn split_len(len: usize) -> Result<ParitySplit, CompressError> {
    if len < 2 {
        return Err(CompressError::TooShort(len));
    }
    Ok(ParitySplit {
        sources: (0..len).step_by(2).collect(),
        destinations: (1..len).step_by(2).collect(),
    })
}

/// `mask[i][j] = |i - j| <= w` over parity indices.
pub fn window_mask(n_sources: usize, n_destinations: usize, window: Window) -> PairMask {
    PairMask::from_fn(n_sources, n_destinations, |i, j| window.admits(i, j))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    pub destination: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassPlan {
    /// Best admissible destination per source; `None` if every pair is masked.
    pub best: Vec<Option<BestMatch>>,
    /// Selected source indices, ascending.
    pub selected: Vec<usize>,
}

impl PassPlan {
    pub fn mergeable(&self) -> usize {
        self.best.iter().filter(|b| b.is_some()).count()
    }
}

fn best_matches(table: &ScoreTable) -> Vec<Option<BestMatch>> {
    (0..table.rows())
        .map(|i| {
            let mut best: Option<BestMatch> = None;
            for (j, &score) in table.row(i).iter().enumerate() {
                if score == f64::NEG_INFINITY {
                    continue;
                }
                if best.is_none_or(|b| score > b.score) {
                    best = Some(BestMatch { destination: j, score });
                }
            }
            best
        })
        .collect()
}

fn select_top(best: &[Option<BestMatch>], r: usize) -> Result<Vec<usize>, CompressError> {
    let mut ranked: Vec<(usize, f64)> = best
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.map(|b| (i, b.score)))
        .collect();
    if ranked.len() < r {
        return Err(CompressError::InsufficientMergeable {
            requested: r,
            available: ranked.len(),
        });
    }
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    let mut selected: Vec<usize> = ranked[..r].iter().map(|&(i, _)| i).collect();
    selected.sort_unstable();
    Ok(selected)
}

/// Picks the `r` sources to merge this pass.
pub fn plan_pass(split: &ParitySplit, table: &ScoreTable, r: usize) -> Result<PassPlan, CompressError> {
    if table.rows() != split.sources.len() || table.cols() != split.destinations.len() {
        return Err(CompressError::DimensionMismatch {
            expected: split.sources.len() * split.destinations.len(),
            found: table.rows() * table.cols(),
        });
    }
    if r == 0 {
        return Err(CompressError::InvalidConfig(
            "a pass must merge at least one source".into(),
        ));
    }
    let best = best_matches(table);
    let selected = select_top(&best, r)?;
    Ok(PassPlan { best, selected })
}

/// Members (current indices) of each output token of a pass, in output
/// order. A merged destination lists itself first, then its sources in
/// ascending order.
fn pass_layout(seq: &TokenSequence, split: &ParitySplit, plan: &PassPlan) -> Vec<Vec<usize>> {
    let mut absorbed: Vec<Vec<usize>> = split.destinations.iter().map(|&d| vec![d]).collect();
    let mut slots: Vec<Vec<usize>> = Vec::with_capacity(split.len() - plan.selected.len());
    let mut chosen = plan.selected.iter().peekable();
    for (i, &src) in split.sources.iter().enumerate() {
        if chosen.next_if_eq(&&i).is_some() {
            let j = plan.best[i].expect("selected source has a match").destination;
            absorbed[j].push(src);
        } else {
            slots.push(vec![src]);
        }
    }
    slots.extend(absorbed);
    let positions = seq.positions();
    slots.sort_unstable_by_key(|members| members.iter().map(|&m| positions[m]).min());
    slots
}

fn build_sequence(seq: &TokenSequence, slots: &[Vec<usize>], weighting: Weighting) -> TokenSequence {
    let dim = seq.dim();
    let mut data = Vec::with_capacity(slots.len() * dim);
    let mut positions = Vec::with_capacity(slots.len());
    let mut counts = Vec::with_capacity(slots.len());
    let mut acc = vec![0.0f64; dim];
    for members in slots {
        positions.push(members.iter().map(|&m| seq.positions()[m]).min().unwrap());
        counts.push(members.iter().map(|&m| seq.counts()[m]).sum());
        if let [only] = members.as_slice() {
            data.extend_from_slice(seq.row(*only));
            continue;
        }
        acc.fill(0.0);
        let mut total = 0.0f64;
        for &m in members {
            let weight = match weighting {
                Weighting::PaperLiteral => 1.0,
                Weighting::SizeWeighted => seq.counts()[m] as f64,
            };
            total += weight;
            for (a, &x) in acc.iter_mut().zip(seq.row(m)) {
                *a += weight * f64::from(x);
            }
        }
        data.extend(acc.iter().map(|a| (a / total) as f32));
    }
    TokenSequence::from_parts(data, dim, positions, counts)
}

fn pass_record(seq: &TokenSequence, split: &ParitySplit, plan: &PassPlan) -> MergePass {
    let positions = seq.positions();
    MergePass {
        input_length: seq.len(),
        sources: split.sources.iter().map(|&s| positions[s]).collect(),
        destinations: split.destinations.iter().map(|&d| positions[d]).collect(),
        merges: plan
            .selected
            .iter()
            .map(|&i| {
                let best = plan.best[i].expect("selected source has a match");
                MergeRecord {
                    source: i + 1,
                    destination: best.destination + 1,
                    score: best.score as f32,
                }
            })
            .collect(),
    }
}

/// Applies a planned pass: merged destinations are averaged with their
/// sources, everything else passes through bit-unchanged, and the output is
/// ordered by representative (smallest) position.
pub fn apply_pass(
    seq: &TokenSequence,
    split: &ParitySplit,
    plan: &PassPlan,
    weighting: Weighting,
) -> (TokenSequence, MergePass) {
    let slots = pass_layout(seq, split, plan);
    (build_sequence(seq, &slots, weighting), pass_record(seq, split, plan))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutput {
    pub sequence: TokenSequence,
    pub trace: MergeTrace,
    /// 1-based input rows composing each output token.
    pub groups: Vec<Vec<usize>>,
}

pub fn compress_merge(
    seq: &TokenSequence,
    keep_ratio: KeepRatio,
    window: Window,
    weighting: Weighting,
) -> Result<MergeOutput, CompressError> {
    compress_merge_to_length(seq, target_length(keep_ratio, seq.len()), window, weighting)
}

/// Runs merge passes until the sequence is `target` tokens long.
pub fn compress_merge_to_length(
    seq: &TokenSequence,
    target: usize,
    window: Window,
    weighting: Weighting,
) -> Result<MergeOutput, CompressError> {
    if target == 0 || target > seq.len() {
        return Err(CompressError::InvalidConfig(format!(
            "target length {target} outside 1..={}",
            seq.len()
        )));
    }
    let mut current = seq.clone();
    let mut groups: Vec<Vec<usize>> = (1..=seq.len()).map(|p| vec![p]).collect();
    let mut trace = MergeTrace::default();

    while current.len() > target {
        let split = parity_split(&current)?;
        let mask = window_mask(split.sources.len(), split.destinations.len(), window);
        let src_rows: Vec<&[f32]> = split.sources.iter().map(|&s| current.row(s)).collect();
        let dst_rows: Vec<&[f32]> = split.destinations.iter().map(|&d| current.row(d)).collect();
        let table = similarity_table(&src_rows, &dst_rows, &mask)?;

        let best = best_matches(&table);
        let mergeable = best.iter().filter(|b| b.is_some()).count();
        let r = (current.len() - target).min(mergeable);
        if r == 0 {
            return Err(CompressError::CannotReachTarget {
                current: current.len(),
                target,
            });
        }
        let plan = PassPlan {
            selected: select_top(&best, r)?,
            best,
        };

        let slots = pass_layout(&current, &split, &plan);
        trace.passes.push(pass_record(&current, &split, &plan));
        groups = slots
            .iter()
            .map(|members| {
                let mut g: Vec<usize> = members.iter().flat_map(|&m| groups[m].iter().copied()).collect();
                g.sort_unstable();
                g
            })
            .collect();
        current = build_sequence(&current, &slots, weighting);
    }

    Ok(MergeOutput {
        sequence: current,
        trace,
        groups,
    })
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::testkit::{generate, SynthSpec};

    fn seq(rows: &[[f32; 2]]) -> TokenSequence {
        TokenSequence::from_rows(rows).unwrap()
    }

    #[test]
    fn parity_split_examples() {
        let s = parity_split(&seq(&[[0.0, 0.0]; 4])).unwrap();
        assert_eq!(s.sources, vec![0, 2]);
        assert_eq!(s.destinations, vec![1, 3]);
        let s = parity_split(&seq(&[[0.0, 0.0]; 5])).unwrap();
        assert_eq!((s.sources.len(), s.destinations.len()), (3, 2));
        assert_eq!(parity_split(&seq(&[[0.0, 0.0]])), Err(CompressError::TooShort(1)));
    }

    #[test]
    fn window_mask_examples() {
        let m = window_mask(3, 3, Window::Bounded(0));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), i == j);
            }
        }
        let m = window_mask(2, 2, Window::Unbounded);
        assert!((0..2).all(|i| (0..2).all(|j| m.get(i, j))));
        // 1-based source 4 reaches only destination 3.
        let m = window_mask(4, 3, Window::Bounded(1));
        assert_eq!(
            (0..3).map(|j| m.get(3, j)).collect::<Vec<_>>(),
            vec![false, false, true]
        );
    }

    #[test]
    fn plan_identical_tokens_ties_to_first_destination() {
        let s = seq(&[[1.0, 1.0]; 4]);
        let split = parity_split(&s).unwrap();
        let rows: Vec<&[f32]> = (0..4).map(|i| s.row(i)).collect();
        let table = similarity_table(&[rows[0], rows[2]], &[rows[1], rows[3]], &PairMask::full(2, 2)).unwrap();
        let plan = plan_pass(&split, &table, 2).unwrap();
        assert_eq!(plan.selected, vec![0, 1]);
        assert!(plan.best.iter().all(|b| b.unwrap().destination == 0));
    }

    #[test]
    fn plan_picks_highest_score() {
        let split = split_len(4).unwrap();
        let table = ScoreTable::from_rows(&[vec![0.9, f64::NEG_INFINITY], vec![f64::NEG_INFINITY, 0.2]]);
        let plan = plan_pass(&split, &table, 1).unwrap();
        assert_eq!(plan.selected, vec![0]);
        assert_eq!(plan.best[0].unwrap().destination, 0);
    }

    #[test]
    fn plan_insufficient_mergeable() {
        let split = split_len(4).unwrap();
        let table = ScoreTable::from_rows(&[vec![0.9, f64::NEG_INFINITY], vec![f64::NEG_INFINITY; 2]]);
        assert_eq!(
            plan_pass(&split, &table, 2),
            Err(CompressError::InsufficientMergeable {
                requested: 2,
                available: 1
            })
        );
    }

    /// Enumerates every (source, destination) pair with plain loops, keeps each
    /// source's first maximum, then orders by (score desc, source asc).
    fn enumeration_plan(rows: &[Vec<f32>], w: usize, r: usize) -> Vec<(usize, usize)> {
        let cos = |a: &[f32], b: &[f32]| {
            let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
            for k in 0..a.len() {
                ab += a[k] as f64 * b[k] as f64;
                aa += a[k] as f64 * a[k] as f64;
                bb += b[k] as f64 * b[k] as f64;
            }
            ab / (aa.sqrt() * bb.sqrt()).max(1e-12)
        };
        let n_src = rows.len().div_ceil(2);
        let n_dst = rows.len() / 2;
        let mut picks = Vec::new();
        for i in 0..n_src {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n_dst {
                if i.abs_diff(j) > w {
                    continue;
                }
                let s = cos(&rows[2 * i], &rows[2 * j + 1]);
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((j, s));
                }
            }
            if let Some((j, s)) = best {
                picks.push((i, j, s));
            }
        }
        for a in 0..picks.len() {
            for b in a + 1..picks.len() {
                let swap = picks[b].2 > picks[a].2 || (picks[b].2 == picks[a].2 && picks[b].0 < picks[a].0);
                if swap {
                    picks.swap(a, b);
                }
            }
        }
        let mut chosen: Vec<(usize, usize)> = picks[..r].iter().map(|p| (p.0, p.1)).collect();
        chosen.sort();
        chosen
    }

    #[test]
    fn plan_matches_enumeration_oracle() {
        for seed in 0..20 {
            let s = generate(&SynthSpec::gaussian(6, 3, seed)).unwrap();
            let rows: Vec<Vec<f32>> = s.rows().map(|r| r.to_vec()).collect();
            let split = parity_split(&s).unwrap();
            let src: Vec<&[f32]> = split.sources.iter().map(|&i| s.row(i)).collect();
            let dst: Vec<&[f32]> = split.destinations.iter().map(|&i| s.row(i)).collect();
            let table = similarity_table(&src, &dst, &window_mask(3, 3, Window::Bounded(1))).unwrap();
            let plan = plan_pass(&split, &table, 2).unwrap();
            let got: Vec<(usize, usize)> = plan
                .selected
                .iter()
                .map(|&i| (i, plan.best[i].unwrap().destination))
                .collect();
            assert_eq!(got, enumeration_plan(&rows, 1, 2), "seed {seed}");
        }
    }

    #[test]
    fn apply_constant_sequence() {
        let s = seq(&[[1.0, 0.0]; 4]);
        let out = compress_merge(
            &s,
            KeepRatio::new(0.5).unwrap(),
            Window::Bounded(8),
            Weighting::PaperLiteral,
        )
        .unwrap();
        assert_eq!(out.sequence.as_flat(), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(out.trace.passes.len(), 1);
    }

    #[test]
    fn apply_two_tokens_literal_mean() {
        let s = seq(&[[2.0, 0.0], [4.0, 0.0]]);
        let out = compress_merge(
            &s,
            KeepRatio::new(0.25).unwrap(),
            Window::Bounded(8),
            Weighting::PaperLiteral,
        )
        .unwrap();
        assert_eq!(out.sequence.as_flat(), &[3.0, 0.0]);
        assert_eq!(out.groups, vec![vec![1, 2]]);
        assert_eq!(out.trace.passes.len(), 1);
        assert_eq!(out.trace.passes[0].merges[0].source, 1);
        assert_eq!(out.trace.passes[0].merges[0].destination, 1);
    }

    #[test]
    fn apply_matches_formula_replay() {
        let rows = [[1.0, 0.0], [1.0, 0.1], [0.0, 1.0], [0.1, 1.0], [5.0, 5.0], [5.0, 5.1]];
        let s = seq(&rows);
        let split = parity_split(&s).unwrap();
        let src: Vec<&[f32]> = split.sources.iter().map(|&i| s.row(i)).collect();
        let dst: Vec<&[f32]> = split.destinations.iter().map(|&i| s.row(i)).collect();
        let table = similarity_table(&src, &dst, &window_mask(3, 3, Window::Bounded(1))).unwrap();
        let plan = plan_pass(&split, &table, 2).unwrap();
        let (out, pass) = apply_pass(&s, &split, &plan, Weighting::PaperLiteral);
        assert_eq!(out.len(), 4);

        // Replay d~_j = (d_j + sum s_i) / (1 + |M(j)|) in f64 from the recorded pairs.
        let mut merged: Vec<Vec<usize>> = vec![vec![]; 3];
        for m in &pass.merges {
            merged[m.destination - 1].push(m.source - 1);
        }
        let mut expected: Vec<(usize, Vec<f64>)> = Vec::new();
        for i in 0..3 {
            if !pass.merges.iter().any(|m| m.source == i + 1) {
                expected.push((2 * i + 1, rows[2 * i].iter().map(|&x| x as f64).collect()));
            }
        }
        for (j, srcs) in merged.iter().enumerate() {
            let mut v: Vec<f64> = rows[2 * j + 1].iter().map(|&x| x as f64).collect();
            for &i in srcs {
                for k in 0..2 {
                    v[k] += rows[2 * i][k] as f64;
                }
            }
            let c = 1.0 + srcs.len() as f64;
            let rep = srcs.iter().map(|&i| 2 * i + 1).chain([2 * j + 2]).min().unwrap();
            expected.push((rep, v.iter().map(|x| x / c).collect()));
        }
        expected.sort_by_key(|e| e.0);
        assert_eq!(
            out.positions(),
            expected.iter().map(|e| e.0).collect::<Vec<_>>().as_slice()
        );
        for (k, (_, v)) in expected.iter().enumerate() {
            for c in 0..2 {
                assert!((out.row(k)[c] as f64 - v[c]).abs() < 1e-6);
            }
        }
        // Sources 1 and 2 tie at the same score; the smaller index wins.
        assert_eq!(out.counts(), &[2, 1, 1, 2]);
    }

    #[test]
    fn unmatched_tokens_pass_through_bit_exact() {
        let s = generate(&SynthSpec::gaussian(9, 4, 3)).unwrap();
        let out = compress_merge_to_length(&s, 8, Window::Bounded(2), Weighting::PaperLiteral).unwrap();
        for (k, g) in out.groups.iter().enumerate() {
            if let [p] = g.as_slice() {
                assert_eq!(out.sequence.row(k), s.row(p - 1));
            }
        }
    }

    #[test]
    fn identity_when_target_is_length() {
        let s = generate(&SynthSpec::gaussian(10, 3, 1)).unwrap();
        let out = compress_merge(&s, KeepRatio::FULL, Window::Bounded(8), Weighting::PaperLiteral).unwrap();
        assert_eq!(out.sequence, s);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn window_zero_reaches_target() {
        let s = generate(&SynthSpec::gaussian(33, 3, 9)).unwrap();
        let out = compress_merge(
            &s,
            KeepRatio::new(0.1).unwrap(),
            Window::Bounded(0),
            Weighting::PaperLiteral,
        )
        .unwrap();
        assert_eq!(out.sequence.len(), 3);
        assert_eq!(out.trace.window_violation(Window::Bounded(0)), None);
    }

    #[test]
    fn trace_replay_reproduces_groups() {
        let s = generate(&SynthSpec::gaussian(40, 5, 2)).unwrap();
        let out = compress_merge(
            &s,
            KeepRatio::new(0.25).unwrap(),
            Window::Bounded(3),
            Weighting::SizeWeighted,
        )
        .unwrap();
        let merges = out.trace.passes.iter().map(|p| p.merges.clone()).collect();
        let (trace, groups) = MergeTrace::replay(40, merges).unwrap();
        assert_eq!(groups, out.groups);
        assert_eq!(trace, out.trace);
    }
}
