//! Segment-shuffling randomization test for zero connectivity.
//!
//! The segment index of X is permuted (all channels jointly) while Y keeps
//! its order, which destroys any X-Y pairing but preserves the structure
//! within each series. Permutations are drawn uniformly, independently and
//! with replacement from all orderings; the p-value uses the add-one rule
//! `(1 + #{null >= observed}) / (1 + n_perm)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{evaluate, MeasureId, MeasureSpec};
use crate::spectral::{BinSamples, SpectralSet};

/// Smallest permutation count that can resolve `p <= 0.05`.
pub const MIN_PERMUTATIONS: usize = 19;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub measure_id: MeasureId,
    pub frequency_bin: usize,
    pub observed: f64,
    pub null_samples: Vec<f64>,
    pub p_value: f64,
    pub n_permutations: usize,
    pub seed: u64,
}

/// The statistic compared against the null: magnitude for signed measures,
/// the value itself otherwise.
pub fn test_statistic(measure: MeasureId, value: f64) -> f64 {
    if measure.is_signed() {
        value.abs()
    } else {
        value
    }
}

/// Add-one empirical p-value of `observed` against `null` (larger is more
/// extreme).
pub fn empirical_p_value(observed: f64, null: &[f64]) -> f64 {
    let exceed = null.iter().filter(|&&v| v >= observed).count();
    (1 + exceed) as f64 / (1 + null.len()) as f64
}

/// Derives the seed used for one bin from a master seed (SplitMix64 finalizer).
pub fn derive_sub_seed(master: u64, bin: usize) -> u64 {
    let mut z = master ^ (bin as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The permutation sequence for a seed; element `k` is the `k`-th null draw.
pub fn permutation_sequence(n_segments: usize, n_perm: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_perm)
        .map(|_| {
            let mut perm: Vec<usize> = (0..n_segments).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect()
}

/// Permutation test on coefficient samples at a single bin.
pub fn permutation_test_samples(
    x: &BinSamples,
    y: &BinSamples,
    bin: usize,
    spec: &MeasureSpec,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationReport> {
    if n_perm < MIN_PERMUTATIONS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_PERMUTATIONS} permutations are required, got {n_perm}"
        )));
    }
    if x.n_segments() != y.n_segments() {
        return Err(Error::SegmentMismatch {
            x: x.n_segments(),
            y: y.n_segments(),
        });
    }
    let observed = evaluate(x, y, bin, spec)?.value;
    let perms = permutation_sequence(x.n_segments(), n_perm, seed);
    let null_samples = perms
        .par_iter()
        .enumerate()
        .map(|(index, perm)| {
            evaluate(&x.permuted(perm), y, bin, spec)
                .map(|r| r.value)
                .map_err(|e| Error::PermutationFailed {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    let stats: Vec<f64> = null_samples.iter().map(|&v| test_statistic(spec.id, v)).collect();
    let p_value = empirical_p_value(test_statistic(spec.id, observed), &stats);
    Ok(PermutationReport {
        measure_id: spec.id,
        frequency_bin: bin,
        observed,
        null_samples,
        p_value,
        n_permutations: n_perm,
        seed,
    })
}

pub fn permutation_test(
    x: &SpectralSet,
    y: &SpectralSet,
    bin: usize,
    spec: &MeasureSpec,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationReport> {
    if x.n_segments() != y.n_segments() {
        return Err(Error::SegmentMismatch {
            x: x.n_segments(),
            y: y.n_segments(),
        });
    }
    permutation_test_samples(&x.at_bin(bin)?, &y.at_bin(bin)?, bin, spec, n_perm, seed)
}

/// Runs [`permutation_test`] on each bin with seed
/// `derive_sub_seed(master_seed, bin)`.
pub fn multi_frequency_test(
    x: &SpectralSet,
    y: &SpectralSet,
    bins: &[usize],
    spec: &MeasureSpec,
    n_perm: usize,
    master_seed: u64,
) -> Result<Vec<PermutationReport>> {
    bins.iter()
        .map(|&bin| permutation_test(x, y, bin, spec, n_perm, derive_sub_seed(master_seed, bin)))
        .collect()
}
