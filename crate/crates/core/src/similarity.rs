//! Cosine similarity tables and L2-norm importance scores.
//!
//! All arithmetic runs in f64 over f32 inputs. A masked pair holds
//! `f64::NEG_INFINITY`, so it loses against any real similarity, including -1.

use crate::error::CompressError;
use crate::sequence::TokenSequence;

/// Floor applied to the product of norms; zero vectors score 0 against
/// everything.
pub const NORM_EPS: f64 = 1e-12;

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (&x, &y)| acc + f64::from(x) * f64::from(y))
}

#[inline]
pub(crate) fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn cosine_with_norms(a: &[f32], b: &[f32], na: f64, nb: f64) -> f64 {
    dot(a, b) / (na * nb).max(NORM_EPS)
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    cosine_with_norms(a, b, norm(a), norm(b))
}

/// Row-major boolean mask of admissible (source, destination) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairMask {
    rows: usize,
    cols: usize,
    allowed: Vec<bool>,
}

impl PairMask {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut allowed = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                allowed.push(f(i, j));
            }
        }
        PairMask { rows, cols, allowed }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged mask");
        PairMask {
            rows: rows.len(),
            cols,
            allowed: rows.concat(),
        }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        PairMask {
            rows,
            cols,
            allowed: vec![true; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.cols + j]
    }
}

/// Source-by-destination similarity scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ScoreTable {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged table");
        ScoreTable {
            rows: rows.len(),
            cols,
            values: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.get(i, j) == f64::NEG_INFINITY
    }
}

/// Cosine similarity for every admissible pair, `-inf` elsewhere.
pub fn similarity_table<A, B>(sources: &[A], destinations: &[B], mask: &PairMask) -> Result<ScoreTable, CompressError>
where
    A: AsRef<[f32]>,
    B: AsRef<[f32]>,
{
    if mask.rows != sources.len() {
        return Err(CompressError::DimensionMismatch {
            expected: sources.len(),
            found: mask.rows,
        });
    }
    if mask.cols != destinations.len() {
        return Err(CompressError::DimensionMismatch {
            expected: destinations.len(),
            found: mask.cols,
        });
    }
    let dim = sources
        .first()
        .map(|s| s.as_ref().len())
        .or_else(|| destinations.first().map(|d| d.as_ref().len()))
        .unwrap_or(0);
    for v in sources
        .iter()
        .map(AsRef::as_ref)
        .chain(destinations.iter().map(AsRef::as_ref))
    {
        if v.len() != dim {
            return Err(CompressError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }

    let dst_norms: Vec<f64> = destinations.iter().map(|d| norm(d.as_ref())).collect();
    let mut values = vec![f64::NEG_INFINITY; sources.len() * destinations.len()];
    for (i, src) in sources.iter().enumerate() {
        let src = src.as_ref();
        let mut src_norm = None;
        let row = &mut values[i * destinations.len()..(i + 1) * destinations.len()];
        for (j, (dst, slot)) in destinations.iter().zip(row.iter_mut()).enumerate() {
            if mask.get(i, j) {
                let na = *src_norm.get_or_insert_with(|| norm(src));
                *slot = cosine_with_norms(src, dst.as_ref(), na, dst_norms[j]);
            }
        }
    }
    Ok(ScoreTable {
        rows: sources.len(),
        cols: destinations.len(),
        values,
    })
}

/// Per-token L2 norm, computed in f64.
pub fn l2_scores(seq: &TokenSequence) -> Vec<f64> {
    seq.rows().map(norm).collect()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert!((cosine(&[1.0, 0.0], &[1.0, 1.0]) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_scores_zero() {
        assert_eq!(cosine(&[0.0, 0.0], &[3.0, -1.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn table_examples() {
        let s = [[1.0f32, 0.0]];
        let d = [[1.0f32, 0.0], [0.0, 1.0]];
        let t = similarity_table(&s, &d, &PairMask::from_rows(&[vec![true, true]])).unwrap();
        assert_eq!(t.row(0), &[1.0, 0.0]);
        let t = similarity_table(&s, &d, &PairMask::from_rows(&[vec![true, false]])).unwrap();
        assert_eq!(t.row(0), &[1.0, f64::NEG_INFINITY]);
        assert!(t.is_masked(0, 1));
    }

    #[test]
    fn table_matches_scalar_loop() {
        let mut rng = crate::testkit::SplitMix64::new(11);
        let mut vecs = || -> Vec<Vec<f32>> {
            (0..3)
                .map(|_| (0..5).map(|_| rng.next_gaussian() as f32).collect())
                .collect()
        };
        let s = vecs();
        let d = vecs();
        let t = similarity_table(&s, &d, &PairMask::full(3, 3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
                for k in 0..5 {
                    let (x, y) = (s[i][k] as f64, d[j][k] as f64);
                    ab += x * y;
                    aa += x * x;
                    bb += y * y;
                }
                let expected = ab / (aa.sqrt() * bb.sqrt());
                assert!((t.get(i, j) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn table_dimension_mismatch() {
        let s = [vec![1.0f32, 0.0]];
        let d = [vec![1.0f32, 0.0, 0.0]];
        assert!(matches!(
            similarity_table(&s, &d, &PairMask::full(1, 1)),
            Err(CompressError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            similarity_table(&s, &s, &PairMask::full(2, 1)),
            Err(CompressError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn l2_examples() {
        let seq = TokenSequence::from_rows(&[[3.0f32, 4.0], [0.0, 0.0]]).unwrap();
        assert_eq!(l2_scores(&seq), vec![5.0, 0.0]);
        let eye = TokenSequence::from_rows(&[[1.0f32, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(l2_scores(&eye), vec![1.0, 1.0]);
    }

    #[test]
    fn l2_matches_scalar_loop() {
        let mut rng = crate::testkit::SplitMix64::new(5);
        let data: Vec<f32> = (0..32).map(|_| rng.next_gaussian() as f32).collect();
        let seq = TokenSequence::from_flat(data.clone(), 8, 4).unwrap();
        let scores = l2_scores(&seq);
        for r in 0..8 {
            let mut acc = 0.0f64;
            for c in 0..4 {
                acc += (data[r * 4 + c] as f64).powi(2);
            }
            assert!((scores[r] - acc.sqrt()).abs() < 1e-12);
        }
    }

    fn vector(dim: usize) -> impl Strategy<Value = Vec<f32>> {
        prop::collection::vec(-10.0f32..10.0, dim)
    }

    /// Orthonormal basis from Gram-Schmidt over random rows.
    fn orthonormal(raw: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in raw {
            let mut u = v.clone();
            for b in &basis {
                let p: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
                u.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-3 {
                return None;
            }
            basis.push(u.into_iter().map(|x| x / n).collect());
        }
        Some(basis)
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_bounded((a, b) in (1usize..12).prop_flat_map(|d| (vector(d), vector(d)))) {
            let ab = cosine(&a, &b);
            prop_assert_eq!(ab, cosine(&b, &a));
            prop_assert!((-1.0 - 1e-6..=1.0 + 1e-6).contains(&ab));
        }

        #[test]
        fn cosine_scale_invariant(a in vector(6), c in 0.01f32..100.0) {
            prop_assume!(norm(&a) > 1e-3);
            let scaled: Vec<f32> = a.iter().map(|x| x * c).collect();
            prop_assert!((cosine(&a, &scaled) - 1.0).abs() < 1e-6);
        }

        #[test]
        fn cosine_rotation_invariant(
            a in vector(4),
            b in vector(4),
            raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 4),
        ) {
            let Some(q) = orthonormal(&raw) else { return Ok(()); };
            let rotate = |v: &[f32]| -> Vec<f32> {
                q.iter().map(|row| row.iter().zip(v).map(|(r, x)| r * *x as f64).sum::<f64>() as f32).collect()
            };
            let before = cosine(&a, &b);
            let after = cosine(&rotate(&a), &rotate(&b));
            prop_assume!(norm(&a) > 1e-2 && norm(&b) > 1e-2);
            prop_assert!((before - after).abs() < 1e-5, "{} vs {}", before, after);
        }

        #[test]
        fn masked_entries_never_win(
            rows in prop::collection::vec(vector(3), 1..6),
            cols in prop::collection::vec(vector(3), 1..6),
            w in 0usize..3,
        ) {
            let mask = PairMask::from_fn(rows.len(), cols.len(), |i, j| i.abs_diff(j) <= w);
            let t = similarity_table(&rows, &cols, &mask).unwrap();
            for i in 0..t.rows() {
                for j in 0..t.cols() {
                    if !mask.get(i, j) {
                        for jj in 0..t.cols() {
                            if mask.get(i, jj) {
                                prop_assert!(t.get(i, j) < t.get(i, jj));
                            }
                        }
                    }
                }
            }
        }
    }
}
