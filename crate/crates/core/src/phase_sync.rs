//! Phase synchronization: coherence between amplitude-normalized
//! coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherence::{check_rank, unexplained_ratio};
use crate::error::{Error, Result};
use crate::measure::{check_univariate, clamp_unit, MeasureId, MeasureResult};
use crate::spectral::{BinSamples, CrossSpectrum, SpectralSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    /// Divide each coefficient vector by its Euclidean norm.
    VectorWise,
    /// Divide each component by its own modulus.
    #[default]
    VariableWise,
}

impl NormalizationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalizationKind::VectorWise => "vector_wise",
            NormalizationKind::VariableWise => "variable_wise",
        }
    }
}

/// What to do with a segment whose coefficient (vector) has zero magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    #[default]
    Error,
    /// Drop the segment (from both series) at that bin; the effective
    /// segment count is reported in the result.
    DropSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Normalization {
    pub kind: NormalizationKind,
    pub degenerate: DegeneratePolicy,
}

impl From<NormalizationKind> for Normalization {
    fn from(kind: NormalizationKind) -> Self {
        Self {
            kind,
            degenerate: DegeneratePolicy::Error,
        }
    }
}

/// Magnitudes at or below this fraction of the largest magnitude seen at the
/// same bin (or exactly zero) count as degenerate.
pub const DEGENERATE_TOLERANCE: f64 = 1e-13;

fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// First degenerate `(segment, channel)` per segment, for every segment that
/// has one. `channel` is `None` for vector-wise normalization.
fn degenerate_entries(samples: &BinSamples, kind: NormalizationKind) -> Vec<(usize, Option<usize>)> {
    let p = samples.n_channels();
    match kind {
        NormalizationKind::VectorWise => {
            let norms: Vec<f64> = samples.rows().map(vector_norm).collect();
            let max = norms.iter().copied().fold(0.0, f64::max);
            norms
                .iter()
                .enumerate()
                .filter(|(_, &n)| !(n > DEGENERATE_TOLERANCE * max))
                .map(|(j, _)| (j, None))
                .collect()
        }
        NormalizationKind::VariableWise => {
            let max: Vec<f64> = (0..p)
                .map(|c| samples.rows().map(|r| r[c].norm()).fold(0.0, f64::max))
                .collect();
            samples
                .rows()
                .enumerate()
                .filter_map(|(j, r)| {
                    (0..p)
                        .find(|&c| !(r[c].norm() > DEGENERATE_TOLERANCE * max[c]))
                        .map(|c| (j, Some(c)))
                })
                .collect()
        }
    }
}

fn normalize_unchecked(samples: &BinSamples, kind: NormalizationKind) -> BinSamples {
    samples.map_rows(|src, dst| match kind {
        NormalizationKind::VectorWise => {
            let n = vector_norm(src);
            for (d, s) in dst.iter_mut().zip(src) {
                *d = s / n;
            }
        }
        NormalizationKind::VariableWise => {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = s / s.norm();
            }
        }
    })
}

/// Normalizes the coefficient vectors at one bin, failing on the first
/// degenerate segment.
pub fn normalize_bin(samples: &BinSamples, bin: usize, kind: NormalizationKind) -> Result<BinSamples> {
    if let Some(&(segment, channel)) = degenerate_entries(samples, kind).first() {
        return Err(Error::Degenerate { segment, bin, channel });
    }
    Ok(normalize_unchecked(samples, kind))
}

/// Normalizes a segment-paired X/Y sample at one bin. Under
/// [`DegeneratePolicy::DropSegment`] a segment degenerate in either series
/// is removed from both.
pub fn normalize_pair(
    x: &BinSamples,
    y: &BinSamples,
    bin: usize,
    norm: Normalization,
) -> Result<(BinSamples, BinSamples)> {
    if x.n_segments() != y.n_segments() {
        return Err(Error::SegmentMismatch {
            x: x.n_segments(),
            y: y.n_segments(),
        });
    }
    match norm.degenerate {
        DegeneratePolicy::Error => Ok((normalize_bin(x, bin, norm.kind)?, normalize_bin(y, bin, norm.kind)?)),
        DegeneratePolicy::DropSegment => {
            let mut bad = vec![false; x.n_segments()];
            for (j, _) in degenerate_entries(x, norm.kind).into_iter().chain(degenerate_entries(y, norm.kind)) {
                bad[j] = true;
            }
            let keep: Vec<usize> = (0..x.n_segments()).filter(|&j| !bad[j]).collect();
            if keep.is_empty() {
                return Err(Error::Degenerate {
                    segment: 0,
                    bin,
                    channel: None,
                });
            }
            Ok((
                normalize_unchecked(&x.select(&keep), norm.kind),
                normalize_unchecked(&y.select(&keep), norm.kind),
            ))
        }
    }
}

/// Normalizes every segment and bin of a spectral set.
pub fn normalize(spectra: &SpectralSet, kind: NormalizationKind) -> Result<SpectralSet> {
    let mut bins = Vec::with_capacity(spectra.n_freqs());
    for w in 0..spectra.n_freqs() {
        bins.push(normalize_bin(&spectra.at_bin(w)?, w, kind)?);
    }
    let p = spectra.n_channels();
    let mut coeffs = Vec::with_capacity(spectra.n_segments() * spectra.n_freqs() * p);
    for j in 0..spectra.n_segments() {
        for b in &bins {
            coeffs.extend_from_slice(b.row(j));
        }
    }
    Ok(spectra.with_coeffs(coeffs, false))
}

pub(crate) fn classical_phase_sync_samples(
    x: &BinSamples,
    y: &BinSamples,
    bin: usize,
    policy: DegeneratePolicy,
) -> Result<MeasureResult> {
    let id = MeasureId::PsClassical;
    check_univariate(id, x.n_channels(), y.n_channels())?;
    let norm = Normalization {
        kind: NormalizationKind::VariableWise,
        degenerate: policy,
    };
    let (xn, yn) = normalize_pair(x, y, bin, norm)?;
    let n = xn.n_segments();
    let resultant: Complex64 = xn.as_slice().iter().zip(yn.as_slice()).map(|(a, b)| a * b.conj()).sum();
    let value = clamp_unit(id, resultant.norm() / n as f64)?;
    Ok(MeasureResult::new(id, bin, value, n))
}

pub(crate) fn general_phase_sync_samples(
    x: &BinSamples,
    y: &BinSamples,
    bin: usize,
    norm: Normalization,
    ridge: Option<f64>,
) -> Result<MeasureResult> {
    let id = MeasureId::PsGeneral;
    let (xn, yn) = normalize_pair(x, y, bin, norm)?;
    let mut cs = CrossSpectrum::from_samples(&xn, &yn, bin)?;
    if let Some(lambda) = ridge {
        cs = cs.with_ridge(lambda);
    }
    check_rank(&cs, "general phase synchronization")?;
    let squared = clamp_unit(id, 1.0 - unexplained_ratio(&cs)?)?;
    Ok(MeasureResult::new(id, bin, squared.sqrt(), cs.n_segments_used()).normalized(norm.kind))
}

/// Modulus of the mean unit phasor difference of two scalar series.
pub fn classical_phase_sync(x: &SpectralSet, y: &SpectralSet, bin: usize) -> Result<MeasureResult> {
    classical_phase_sync_samples(&x.at_bin(bin)?, &y.at_bin(bin)?, bin, DegeneratePolicy::Error)
}

/// General phase synchronization: the (unsquared) general coherence of the
/// normalized coefficient vectors.
pub fn general_phase_sync(
    x: &SpectralSet,
    y: &SpectralSet,
    bin: usize,
    norm: impl Into<Normalization>,
) -> Result<MeasureResult> {
    general_phase_sync_samples(&x.at_bin(bin)?, &y.at_bin(bin)?, bin, norm.into(), None)
}
