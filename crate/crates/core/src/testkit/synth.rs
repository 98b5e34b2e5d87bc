use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use crate::error::CompressError;
use crate::sequence::TokenSequence;

/// Parameters of the piecewise-events profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    pub events: usize,
    /// Spans are drawn uniformly from roughly `[mean_span/2, 3*mean_span/2]`.
    pub mean_span: usize,
    /// Standard deviation of within-event jitter around the event centroid.
    pub noise: f64,
    /// Standard deviation of centroids and of background tokens.
    pub separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    IidGaussian,
    PiecewiseEvents(EventParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub length: usize,
    pub dim: usize,
    pub seed: u64,
    pub profile: Profile,
}

// Separate streams so the event layout does not shift when `dim` changes.
const LAYOUT_STREAM: u64 = 0x5EED_1A70_0000_0001;

impl SynthSpec {
    pub fn gaussian(length: usize, dim: usize, seed: u64) -> Self {
        SynthSpec {
            length,
            dim,
            seed,
            profile: Profile::IidGaussian,
        }
    }

    pub fn events(length: usize, dim: usize, seed: u64, params: EventParams) -> Self {
        SynthSpec {
            length,
            dim,
            seed,
            profile: Profile::PiecewiseEvents(params),
        }
    }

    pub fn validate(&self) -> Result<(), CompressError> {
        let bad = |msg: &str| Err(CompressError::InvalidConfig(msg.into()));
        if self.length == 0 || self.dim == 0 {
            return bad("length and dim must be at least 1");
        }
        if let Profile::PiecewiseEvents(p) = self.profile {
            if p.events == 0 || p.events > self.length {
                return bad("event count must lie in 1..=length");
            }
            if p.mean_span == 0 {
                return bad("mean event span must be at least 1");
            }
            if !(p.noise.is_finite() && p.noise >= 0.0 && p.separation.is_finite() && p.separation >= 0.0) {
                return bad("noise and separation must be finite and non-negative");
            }
        }
        Ok(())
    }

    /// 0-based half-open token ranges of each event; empty for the iid
    /// profile. Gaps between events hold background tokens.
    pub fn event_spans(&self) -> Vec<(usize, usize)> {
        let Profile::PiecewiseEvents(p) = self.profile else {
            return Vec::new();
        };
        let mut rng = SplitMix64::new(self.seed ^ LAYOUT_STREAM);
        let lo = (p.mean_span / 2).max(1) as u64;
        let hi = (p.mean_span + p.mean_span / 2).max(1) as u64;
        let mut spans: Vec<usize> = (0..p.events).map(|_| (lo + rng.below(hi - lo + 1)) as usize).collect();
        // Trim the longest spans until everything fits.
        let mut total: usize = spans.iter().sum();
        while total > self.length {
            let k = (0..spans.len())
                .max_by_key(|&k| (spans[k], std::cmp::Reverse(k)))
                .unwrap();
            spans[k] -= 1;
            total -= 1;
        }
        let gaps = p.events + 1;
        let free = self.length - total;
        let mut ranges = Vec::with_capacity(p.events);
        let mut at = 0;
        for (k, span) in spans.into_iter().enumerate() {
            at += free / gaps + usize::from(k < free % gaps);
            ranges.push((at, at + span));
            at += span;
        }
        ranges
    }
}

/// Deterministic synthetic sequence for `spec`.
pub fn generate(spec: &SynthSpec) -> Result<TokenSequence, CompressError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let dim = spec.dim;
    let mut data: Vec<f32> = Vec::with_capacity(spec.length * dim);
    match spec.profile {
        Profile::IidGaussian => {
            data.extend((0..spec.length * dim).map(|_| rng.next_gaussian() as f32));
        }
        Profile::PiecewiseEvents(p) => {
            let spans = spec.event_spans();
            let mut event_at = vec![None; spec.length];
            for (e, &(a, b)) in spans.iter().enumerate() {
                event_at[a..b].iter_mut().for_each(|slot| *slot = Some(e));
            }
            let centroids: Vec<Vec<f64>> = spans
                .iter()
                .map(|_| (0..dim).map(|_| p.separation * rng.next_gaussian()).collect())
                .collect();
            for slot in &event_at {
                match slot {
                    Some(e) => data.extend(
                        centroids[*e]
                            .iter()
                            .map(|&c| (c + p.noise * rng.next_gaussian()) as f32),
                    ),
                    None => data.extend((0..dim).map(|_| (p.separation * rng.next_gaussian()) as f32)),
                }
            }
        }
    }
    TokenSequence::from_flat(data, spec.length, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(noise: f64) -> EventParams {
        EventParams {
            events: 5,
            mean_span: 6,
            noise,
            separation: 1.0,
        }
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec::events(64, 4, 9, params(0.1));
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec::events(64, 4, 10, params(0.1));
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn gaussian_shape() {
        let seq = generate(&SynthSpec::gaussian(8, 4, 0)).unwrap();
        assert_eq!((seq.len(), seq.dim()), (8, 4));
        assert!(seq.as_flat().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_noise_duplicates_within_events() {
        let spec = SynthSpec::events(50, 3, 2, params(0.0));
        let seq = generate(&spec).unwrap();
        let spans = spec.event_spans();
        assert_eq!(spans.len(), 5);
        for (a, b) in spans {
            for r in a + 1..b {
                assert_eq!(seq.row(r), seq.row(a));
            }
        }
    }

    #[test]
    fn spans_fit_and_are_disjoint() {
        for seed in 0..50 {
            for len in [5, 12, 40] {
                let spec = SynthSpec::events(
                    len,
                    2,
                    seed,
                    EventParams {
                        events: 5,
                        mean_span: 9,
                        noise: 0.0,
                        separation: 1.0,
                    },
                );
                let spans = spec.event_spans();
                assert!(spans.iter().all(|(a, b)| b > a));
                assert!(spans.windows(2).all(|w| w[0].1 <= w[1].0));
                assert!(spans.last().unwrap().1 <= len);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate(&SynthSpec::gaussian(0, 3, 0)).is_err());
        assert!(generate(&SynthSpec::events(3, 3, 0, params(0.0))).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SynthSpec::events(64, 4, 9, params(0.1));
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SynthSpec>(&text).unwrap(), spec);
    }
}
