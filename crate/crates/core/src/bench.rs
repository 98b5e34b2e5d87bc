//! Wall-clock timing of a kernel: warm-up runs are discarded, then the
//! median and 90th percentile of the timed repeats are reported.

use std::hint::black_box;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct TimingStats {
    /// Per-repeat wall time in microseconds, in run order.
    pub samples_us: Vec<f64>,
    pub median_us: f64,
    pub p90_us: f64,
}

impl TimingStats {
    pub fn from_samples(samples_us: Vec<f64>) -> Self {
        assert!(!samples_us.is_empty(), "need at least one sample");
        let mut sorted = samples_us.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median_us = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        // Nearest-rank percentile.
        let p90_us = sorted[(n * 9).div_ceil(10) - 1];
        TimingStats {
            samples_us,
            median_us,
            p90_us,
        }
    }
}

pub fn time_kernel<T>(warmup: usize, repeats: usize, mut kernel: impl FnMut() -> T) -> TimingStats {
    assert!(repeats > 0, "need at least one timed repeat");
    for _ in 0..warmup {
        black_box(kernel());
    }
    let samples = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            black_box(kernel());
            start.elapsed().as_secs_f64() * 1e6
        })
        .collect();
    TimingStats::from_samples(samples)
}
