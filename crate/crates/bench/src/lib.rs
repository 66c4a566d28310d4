//! Fixtures shared by the benchmarks.

use lagcoh_core::simulation::{generate_blurring, BlurringScenario, SourceSpec};
use lagcoh_core::{RMatrix, SegmentedSeries};

/// A noisy blurring dataset with `p` X channels and `q` Y channels driven
/// by a single sinusoidal source at bin 5.
pub fn blurring_dataset(p: usize, q: usize, n_segments: usize, n_samples: usize) -> (SegmentedSeries, SegmentedSeries) {
    let scenario = BlurringScenario {
        mixing_c: RMatrix::from_fn(p, 1, |i, _| 1.0 + 0.1 * i as f64),
        mixing_d: RMatrix::from_fn(q, 1, |i, _| 0.8 - 0.1 * i as f64),
        source: SourceSpec::sinusoid(5, 1.0),
        noise_std_x: 0.5,
        noise_std_y: 0.5,
        n_segments,
        n_samples,
        seed: 1,
    };
    generate_blurring(&scenario).expect("valid benchmark scenario")
}
