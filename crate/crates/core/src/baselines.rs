//! Uniform average pooling and L2-norm pruning baselines.

use std::cmp::Ordering;

use crate::error::CompressError;
use crate::sequence::{target_length, KeepRatio, TokenSequence};
use crate::similarity::l2_scores;

/// Output of a baseline: the compressed sequence plus 1-based input rows per
/// output token and the rows that were discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutput {
    pub sequence: TokenSequence,
    pub groups: Vec<Vec<usize>>,
    pub dropped: Vec<usize>,
}

/// Integral pooling factor `round(1 / rho)`.
pub fn pooling_factor(keep_ratio: KeepRatio) -> usize {
    (1.0 / keep_ratio.get()).round() as usize
}

/// Averages consecutive blocks of `k = round(1/rho)` tokens. The last block
/// may be shorter. Fails with `UnavailableRatio` when `k < 2`.
pub fn compress_uniavg(seq: &TokenSequence, keep_ratio: KeepRatio) -> Result<BaselineOutput, CompressError> {
    let k = pooling_factor(keep_ratio);
    if k < 2 {
        return Err(CompressError::UnavailableRatio {
            keep_ratio: keep_ratio.get(),
            factor: k,
        });
    }
    let dim = seq.dim();
    let n_out = seq.len().div_ceil(k);
    let mut data = Vec::with_capacity(n_out * dim);
    let mut positions = Vec::with_capacity(n_out);
    let mut counts = Vec::with_capacity(n_out);
    let mut groups = Vec::with_capacity(n_out);
    let mut acc = vec![0.0f64; dim];
    for start in (0..seq.len()).step_by(k) {
        let end = (start + k).min(seq.len());
        acc.fill(0.0);
        for row in start..end {
            for (a, &x) in acc.iter_mut().zip(seq.row(row)) {
                *a += f64::from(x);
            }
        }
        let n = (end - start) as f64;
        data.extend(acc.iter().map(|a| (a / n) as f32));
        positions.push(seq.positions()[start]);
        counts.push(seq.counts()[start..end].iter().sum());
        groups.push((start + 1..=end).collect());
    }
    Ok(BaselineOutput {
        sequence: TokenSequence::from_parts(data, dim, positions, counts),
        groups,
        dropped: Vec::new(),
    })
}

/// Orders by score descending, then position ascending.
fn rank(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[b]
        .partial_cmp(&scores[a])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

fn keep_rows(seq: &TokenSequence, mut kept: Vec<usize>) -> BaselineOutput {
    kept.sort_unstable();
    let dim = seq.dim();
    let mut data = Vec::with_capacity(kept.len() * dim);
    for &k in &kept {
        data.extend_from_slice(seq.row(k));
    }
    let mut is_kept = vec![false; seq.len()];
    kept.iter().for_each(|&k| is_kept[k] = true);
    BaselineOutput {
        sequence: TokenSequence::from_parts(
            data,
            dim,
            kept.iter().map(|&k| seq.positions()[k]).collect(),
            kept.iter().map(|&k| seq.counts()[k]).collect(),
        ),
        groups: kept.iter().map(|&k| vec![k + 1]).collect(),
        dropped: (0..seq.len()).filter(|&i| !is_kept[i]).map(|i| i + 1).collect(),
    }
}

/// Keeps the `L'` tokens with the largest L2 norm, in original order.
pub fn compress_global_topk(seq: &TokenSequence, keep_ratio: KeepRatio) -> BaselineOutput {
    let target = target_length(keep_ratio, seq.len());
    let scores = l2_scores(seq);
    let mut order: Vec<usize> = (0..seq.len()).collect();
    order.sort_by(|&a, &b| rank(&scores, a, b));
    order.truncate(target);
    keep_rows(seq, order)
}

/// Contiguous segments and the number of tokens each one keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentPartition {
    /// Half-open 0-based row ranges.
    pub bounds: Vec<(usize, usize)>,
    pub quotas: Vec<usize>,
}

/// Splits `len` rows into `min(n_segments, len)` near-equal segments (the
/// first `len % n` get one extra row).
pub fn segment_bounds(len: usize, n_segments: usize) -> Vec<(usize, usize)> {
    let n = n_segments.min(len).max(1);
    let (base, extra) = (len / n, len % n);
    let mut bounds = Vec::with_capacity(n);
    let mut start = 0;
    for s in 0..n {
        let size = base + usize::from(s < extra);
        bounds.push((start, start + size));
        start += size;
    }
    bounds
}

/// Largest-remainder apportionment of `target` over the segments, in exact
/// integer arithmetic. Ties on remainder go to the earlier segment. Any
/// quota above its segment length is clamped and the excess handed to
/// segments with spare room, best top unkept norm first.
pub fn segment_partition(scores: &[f64], n_segments: usize, target: usize) -> SegmentPartition {
    let len = scores.len();
    let bounds = segment_bounds(len, n_segments);
    let sizes: Vec<usize> = bounds.iter().map(|(a, b)| b - a).collect();

    let mut quotas: Vec<usize> = sizes.iter().map(|&s| target * s / len).collect();
    let mut leftover = target - quotas.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..sizes.len()).collect();
    by_remainder.sort_by_key(|&s| (std::cmp::Reverse(target * sizes[s] % len), s));
    for &s in by_remainder.iter().cycle().take(leftover) {
        quotas[s] += 1;
    }

    leftover = 0;
    for (q, &size) in quotas.iter_mut().zip(&sizes) {
        if *q > size {
            leftover += *q - size;
            *q = size;
        }
    }
    while leftover > 0 {
        // Segment with room whose best not-yet-kept token scores highest.
        let mut best: Option<(usize, usize)> = None;
        for (s, &(start, end)) in bounds.iter().enumerate() {
            if quotas[s] >= sizes[s] {
                continue;
            }
            let mut order: Vec<usize> = (start..end).collect();
            order.sort_by(|&a, &b| rank(scores, a, b));
            let candidate = order[quotas[s]];
            if best.is_none_or(|(_, c)| rank(scores, candidate, c) == Ordering::Less) {
                best = Some((s, candidate));
            }
        }
        let (s, _) = best.expect("target never exceeds the sequence length");
        quotas[s] += 1;
        leftover -= 1;
    }
    SegmentPartition { bounds, quotas }
}

/// Top-K by L2 norm within each of `n_segments` temporal segments.
pub fn compress_segmentwise_topk(
    seq: &TokenSequence,
    keep_ratio: KeepRatio,
    n_segments: usize,
) -> Result<BaselineOutput, CompressError> {
    if n_segments == 0 {
        return Err(CompressError::InvalidConfig("segment count must be at least 1".into()));
    }
    let target = target_length(keep_ratio, seq.len());
    let scores = l2_scores(seq);
    let partition = segment_partition(&scores, n_segments, target);
    let mut kept = Vec::with_capacity(target);
    for (&(start, end), &quota) in partition.bounds.iter().zip(&partition.quotas) {
        let mut order: Vec<usize> = (start..end).collect();
        order.sort_by(|&a, &b| rank(&scores, a, b));
        kept.extend_from_slice(&order[..quota]);
    }
    Ok(keep_rows(seq, kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{generate, SynthSpec};
    use proptest::prelude::*;

    fn ratio(v: f64) -> KeepRatio {
        KeepRatio::new(v).unwrap()
    }

    fn norms_seq(norms: &[f32]) -> TokenSequence {
        let rows: Vec<[f32; 1]> = norms.iter().map(|&n| [n]).collect();
        TokenSequence::from_rows(&rows).unwrap()
    }

    #[test]
    fn uniavg_unavailable_at_three_quarters() {
        let s = norms_seq(&[1.0, 2.0, 3.0]);
        assert_eq!(
            compress_uniavg(&s, ratio(0.75)),
            Err(CompressError::UnavailableRatio {
                keep_ratio: 0.75,
                factor: 1
            })
        );
    }

    #[test]
    fn uniavg_pairs_with_singleton_tail() {
        let s = TokenSequence::from_rows(&[[2.0f32, 0.0], [4.0, 0.0], [6.0, 0.0]]).unwrap();
        let out = compress_uniavg(&s, ratio(0.5)).unwrap();
        assert_eq!(out.sequence.as_flat(), &[3.0, 0.0, 6.0, 0.0]);
        assert_eq!(out.groups, vec![vec![1, 2], vec![3]]);
        assert_eq!(out.sequence.counts(), &[2, 1]);
    }

    #[test]
    fn uniavg_matches_range_oracle() {
        let s = generate(&SynthSpec::gaussian(16, 3, 21)).unwrap();
        let out = compress_uniavg(&s, ratio(0.25)).unwrap();
        assert_eq!(out.sequence.len(), 4);
        for m in 0..4 {
            for c in 0..3 {
                let mut sum = 0.0f64;
                for r in 4 * m..4 * m + 4 {
                    sum += s.row(r)[c] as f64;
                }
                assert_eq!(out.sequence.row(m)[c], (sum / 4.0) as f32);
            }
        }
    }

    #[test]
    fn global_topk_examples() {
        let out = compress_global_topk(&norms_seq(&[5.0, 1.0, 3.0]), ratio(0.67));
        assert_eq!(out.groups, vec![vec![1], vec![3]]);
        assert_eq!(out.dropped, vec![2]);
        assert_eq!(out.sequence.as_flat(), &[5.0, 3.0]);

        let out = compress_global_topk(&norms_seq(&[2.0, -2.0, 2.0, 2.0]), ratio(0.5));
        assert_eq!(out.groups, vec![vec![1], vec![2]]);
    }

    #[test]
    fn global_topk_matches_sort_oracle() {
        let s = generate(&SynthSpec::gaussian(64, 4, 8)).unwrap();
        let out = compress_global_topk(&s, ratio(0.25));
        let mut keyed: Vec<(f64, i64)> = s
            .rows()
            .enumerate()
            .map(|(i, r)| {
                (
                    r.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt(),
                    -(i as i64 + 1),
                )
            })
            .collect();
        keyed.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut expected: Vec<usize> = keyed[..16].iter().map(|k| (-k.1) as usize).collect();
        expected.sort();
        let got: Vec<usize> = out.groups.iter().map(|g| g[0]).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn segmentwise_one_per_segment() {
        let out = compress_segmentwise_topk(&norms_seq(&[9.0, 1.0, 1.0, 9.0]), ratio(0.5), 2).unwrap();
        assert_eq!(out.groups, vec![vec![1], vec![4]]);
    }

    #[test]
    fn segmentwise_single_segment_is_global() {
        let s = generate(&SynthSpec::gaussian(37, 5, 4)).unwrap();
        for r in [0.75, 0.5, 0.25, 0.1] {
            assert_eq!(
                compress_segmentwise_topk(&s, ratio(r), 1).unwrap(),
                compress_global_topk(&s, ratio(r))
            );
        }
    }

    #[test]
    fn segmentwise_matches_apportionment_oracle() {
        let s = generate(&SynthSpec::gaussian(64, 4, 13)).unwrap();
        let out = compress_segmentwise_topk(&s, ratio(0.25), 8).unwrap();
        // 8 segments of 8 rows, 16 kept: exactly 2 per segment.
        let norms: Vec<f64> = s
            .rows()
            .map(|r| r.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt())
            .collect();
        let mut expected = Vec::new();
        for seg in 0..8 {
            let mut idx: Vec<usize> = (seg * 8..seg * 8 + 8).collect();
            idx.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));
            let mut top = idx[..2].to_vec();
            top.sort();
            expected.extend(top.into_iter().map(|i| i + 1));
        }
        let got: Vec<usize> = out.groups.iter().map(|g| g[0]).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn segment_bounds_front_loaded() {
        assert_eq!(segment_bounds(10, 3), vec![(0, 4), (4, 7), (7, 10)]);
        assert_eq!(segment_bounds(3, 8), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn apportionment_remainders() {
        // Segments 4,3,3 with target 5: ideal 2.0, 1.5, 1.5 -> 2, 2, 1.
        let p = segment_partition(&[1.0; 10], 3, 5);
        assert_eq!(p.quotas, vec![2, 2, 1]);
    }

    #[test]
    fn segmentwise_rejects_zero_segments() {
        assert!(compress_segmentwise_topk(&norms_seq(&[1.0, 2.0]), ratio(0.5), 0).is_err());
    }

    proptest! {
        #[test]
        fn quotas_sum_to_target(
            scores in prop::collection::vec(0.0f64..10.0, 1..200),
            n in 1usize..20,
            t in 0.0f64..1.0,
        ) {
            let target = ((scores.len() as f64 * t).round() as usize).max(1);
            let p = segment_partition(&scores, n, target);
            prop_assert_eq!(p.quotas.iter().sum::<usize>(), target);
            for (q, (a, b)) in p.quotas.iter().zip(&p.bounds) {
                prop_assert!(*q <= b - a);
                prop_assert!(b > a);
            }
            prop_assert_eq!(p.bounds.first().unwrap().0, 0);
            prop_assert_eq!(p.bounds.last().unwrap().1, scores.len());
        }
    }
}
