//! Segmented DFT and Hermitian cross-spectral covariances.

use std::ops::Range;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Real multichannel recording cut into equal-length segments.
///
/// Stored row-major as `(segment, sample, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedSeries {
    data: Vec<f64>,
    n_segments: usize,
    n_samples: usize,
    n_channels: usize,
    sample_rate_hz: Option<f64>,
}

impl SegmentedSeries {
    pub fn new(
        data: Vec<f64>,
        n_segments: usize,
        n_samples: usize,
        n_channels: usize,
    ) -> Result<Self> {
        if n_segments < 1 || n_samples < 2 || n_channels < 1 {
            return Err(Error::Shape(format!(
                "need n_segments >= 1, n_samples >= 2, n_channels >= 1; got {n_segments}, {n_samples}, {n_channels}"
            )));
        }
        let expected = n_segments * n_samples * n_channels;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} values ({n_segments} x {n_samples} x {n_channels}), found {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                segment: pos / (n_samples * n_channels),
                sample: (pos / n_channels) % n_samples,
                channel: pos % n_channels,
            });
        }
        Ok(Self {
            data,
            n_segments,
            n_samples,
            n_channels,
            sample_rate_hz: None,
        })
    }

    pub fn from_fn(
        n_segments: usize,
        n_samples: usize,
        n_channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(n_segments * n_samples * n_channels);
        for j in 0..n_segments {
            for t in 0..n_samples {
                for c in 0..n_channels {
                    data.push(f(j, t, c));
                }
            }
        }
        Self::new(data, n_segments, n_samples, n_channels)
    }

    pub fn with_sample_rate(mut self, hz: f64) -> Result<Self> {
        if !(hz > 0.0 && hz.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample rate must be positive, got {hz}")));
        }
        self.sample_rate_hz = Some(hz);
        Ok(self)
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn sample_rate_hz(&self) -> Option<f64> {
        self.sample_rate_hz
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn value(&self, segment: usize, sample: usize, channel: usize) -> f64 {
        self.data[(segment * self.n_samples + sample) * self.n_channels + channel]
    }

    fn map_values(&self, mut f: impl FnMut(usize, usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for j in 0..self.n_segments {
            for t in 0..self.n_samples {
                for c in 0..self.n_channels {
                    let idx = (j * self.n_samples + t) * self.n_channels + c;
                    out.data[idx] = f(j, t, c, self.data[idx]);
                }
            }
        }
        out
    }

    /// Subtracts each segment's time average, per channel.
    pub fn subtract_segment_means(&self) -> Self {
        let n_t = self.n_samples as f64;
        let means: Vec<f64> = (0..self.n_segments)
            .flat_map(|j| {
                (0..self.n_channels)
                    .map(move |c| (0..self.n_samples).map(|t| self.value(j, t, c)).sum::<f64>() / n_t)
            })
            .collect();
        self.map_values(|j, _, c, v| v - means[j * self.n_channels + c])
    }

    /// Subtracts the across-segment mean waveform, per sample and channel.
    /// In the frequency domain this is exactly ensemble-mean removal of the
    /// DFT coefficients.
    pub fn subtract_ensemble_mean(&self) -> Self {
        let n_r = self.n_segments as f64;
        let mut mean = vec![0.0; self.n_samples * self.n_channels];
        for j in 0..self.n_segments {
            for (k, m) in mean.iter_mut().enumerate() {
                *m += self.data[j * self.n_samples * self.n_channels + k];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n_r);
        self.map_values(|_, t, c, v| v - mean[t * self.n_channels + c])
    }

    /// Concatenates channels: `first` channels then `second` channels.
    pub fn stack(first: &Self, second: &Self) -> Result<Self> {
        if first.n_segments != second.n_segments || first.n_samples != second.n_samples {
            return Err(Error::Shape(format!(
                "cannot stack {}x{} with {}x{} (segments x samples)",
                first.n_segments, first.n_samples, second.n_segments, second.n_samples
            )));
        }
        let channels = first.n_channels + second.n_channels;
        let mut out = Self::from_fn(first.n_segments, first.n_samples, channels, |j, t, c| {
            if c < first.n_channels {
                first.value(j, t, c)
            } else {
                second.value(j, t, c - first.n_channels)
            }
        })?;
        out.sample_rate_hz = first.sample_rate_hz.or(second.sample_rate_hz);
        Ok(out)
    }
}

/// Per-segment, per-frequency complex DFT coefficient vectors.
///
/// Stored row-major as `(segment, frequency, channel)`, so the coefficient
/// vector of one segment at one bin is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSet {
    coeffs: Vec<Complex64>,
    n_segments: usize,
    n_freqs: usize,
    n_channels: usize,
    mean_removed: bool,
}

impl SpectralSet {
    /// Wraps arbitrary complex coefficients (for example from another
    /// transform). `n_freqs` is the DFT length.
    pub fn from_coeffs(
        coeffs: Vec<Complex64>,
        n_segments: usize,
        n_freqs: usize,
        n_channels: usize,
    ) -> Result<Self> {
        if coeffs.len() != n_segments * n_freqs * n_channels {
            return Err(Error::Shape(format!(
                "expected {} coefficients, found {}",
                n_segments * n_freqs * n_channels,
                coeffs.len()
            )));
        }
        if n_segments == 0 || n_freqs == 0 || n_channels == 0 {
            return Err(Error::Shape("spectral set dimensions must be positive".into()));
        }
        if let Some(pos) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                segment: pos / (n_freqs * n_channels),
                sample: (pos / n_channels) % n_freqs,
                channel: pos % n_channels,
            });
        }
        Ok(Self {
            coeffs,
            n_segments,
            n_freqs,
            n_channels,
            mean_removed: false,
        })
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn n_freqs(&self) -> usize {
        self.n_freqs
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn mean_removed(&self) -> bool {
        self.mean_removed
    }

    #[inline]
    pub fn coeff(&self, segment: usize, bin: usize, channel: usize) -> Complex64 {
        self.coeffs[(segment * self.n_freqs + bin) * self.n_channels + channel]
    }

    /// Coefficient vector of one segment at one bin.
    pub fn vector(&self, segment: usize, bin: usize) -> &[Complex64] {
        let start = (segment * self.n_freqs + bin) * self.n_channels;
        &self.coeffs[start..start + self.n_channels]
    }

    /// Bins exposed by default for real input: `0..=N/2`. With `full`, all `N`.
    pub fn bins(&self, full: bool) -> Range<usize> {
        if full {
            0..self.n_freqs
        } else {
            0..self.n_freqs / 2 + 1
        }
    }

    fn check_bin(&self, bin: usize) -> Result<()> {
        if bin >= self.n_freqs {
            return Err(Error::BinOutOfRange {
                bin,
                n_freqs: self.n_freqs,
            });
        }
        Ok(())
    }

    /// Extracts all segments' coefficient vectors at one bin.
    pub fn at_bin(&self, bin: usize) -> Result<BinSamples> {
        self.check_bin(bin)?;
        let mut values = Vec::with_capacity(self.n_segments * self.n_channels);
        for j in 0..self.n_segments {
            values.extend_from_slice(self.vector(j, bin));
        }
        Ok(BinSamples {
            values,
            n_segments: self.n_segments,
            n_channels: self.n_channels,
        })
    }

    /// Returns the set with `coeffs[j]` replaced by `coeffs[perm[j]]`.
    pub fn permute_segments(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_segments {
            return Err(Error::Shape(format!(
                "permutation has {} entries for {} segments",
                perm.len(),
                self.n_segments
            )));
        }
        let block = self.n_freqs * self.n_channels;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for &src in perm {
            coeffs.extend_from_slice(&self.coeffs[src * block..(src + 1) * block]);
        }
        Ok(Self { coeffs, ..*self })
    }

    pub(crate) fn with_coeffs(&self, coeffs: Vec<Complex64>, mean_removed: bool) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self {
            coeffs,
            mean_removed,
            ..*self
        }
    }

    /// Raw coefficients, laid out `(segment, bin, channel)`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }
}

/// Coefficient vectors of every segment at a single frequency bin;
/// an `n_segments x n_channels` complex array.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSamples {
    values: Vec<Complex64>,
    n_segments: usize,
    n_channels: usize,
}

impl BinSamples {
    pub fn new(values: Vec<Complex64>, n_segments: usize, n_channels: usize) -> Result<Self> {
        if values.len() != n_segments * n_channels || n_channels == 0 {
            return Err(Error::Shape(format!(
                "expected {n_segments} x {n_channels} coefficients, found {}",
                values.len()
            )));
        }
        Ok(Self {
            values,
            n_segments,
            n_channels,
        })
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn row(&self, segment: usize) -> &[Complex64] {
        &self.values[segment * self.n_channels..(segment + 1) * self.n_channels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks_exact(self.n_channels)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    /// Row `j` of the result is row `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        self.select(perm)
    }

    /// Keeps the listed segments, in the given order.
    pub fn select(&self, segments: &[usize]) -> Self {
        let mut values = Vec::with_capacity(segments.len() * self.n_channels);
        for &j in segments {
            values.extend_from_slice(self.row(j));
        }
        Self {
            values,
            n_segments: segments.len(),
            n_channels: self.n_channels,
        }
    }

    pub fn map_rows(&self, mut f: impl FnMut(&[Complex64], &mut [Complex64])) -> Self {
        let mut values = self.values.clone();
        for (src, dst) in self.values.chunks_exact(self.n_channels).zip(values.chunks_exact_mut(self.n_channels)) {
            f(src, dst);
        }
        Self { values, ..*self }
    }
}

/// Which mean-removal steps precede the cross-spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Subtract the across-segment mean of the DFT coefficients.
    Ensemble,
    /// Subtract each segment's time average before the DFT.
    PerSegment,
    #[default]
    Both,
    None,
}

impl Centering {
    pub fn per_segment(self) -> bool {
        matches!(self, Centering::PerSegment | Centering::Both)
    }

    pub fn ensemble(self) -> bool {
        matches!(self, Centering::Ensemble | Centering::Both)
    }
}

/// Forward DFT of every segment and channel, all `N` bins, no scaling.
pub fn dft_segments(series: &SegmentedSeries) -> Result<SpectralSet> {
    if let Some(pos) = series.data.iter().position(|v| !v.is_finite()) {
        let (n_t, p) = (series.n_samples, series.n_channels);
        return Err(Error::NonFinite {
            segment: pos / (n_t * p),
            sample: (pos / p) % n_t,
            channel: pos % p,
        });
    }
    let n_t = series.n_samples;
    let p = series.n_channels;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_t);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); series.n_segments * n_t * p];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_t];
    for j in 0..series.n_segments {
        for c in 0..p {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(series.value(j, t, c), 0.0);
            }
            fft.process(&mut buf);
            // Real input: bin 0 (and N/2) are real and the upper half mirrors
            // the lower half. Enforce both exactly.
            buf[0].im = 0.0;
            if n_t % 2 == 0 {
                buf[n_t / 2].im = 0.0;
            }
            for w in n_t / 2 + 1..n_t {
                buf[w] = buf[n_t - w].conj();
            }
            for (w, b) in buf.iter().enumerate() {
                coeffs[(j * n_t + w) * p + c] = *b;
            }
        }
    }
    Ok(SpectralSet {
        coeffs,
        n_segments: series.n_segments,
        n_freqs: n_t,
        n_channels: p,
        mean_removed: false,
    })
}

/// Subtracts, per bin and channel, the mean coefficient across segments.
pub fn remove_ensemble_mean(spectra: &SpectralSet) -> Result<SpectralSet> {
    if spectra.n_segments < 2 {
        return Err(Error::TooFewSegments {
            what: "ensemble mean removal",
            needed: 2,
            found: spectra.n_segments,
        });
    }
    let block = spectra.n_freqs * spectra.n_channels;
    let n_r = spectra.n_segments as f64;
    let mut mean = vec![Complex64::new(0.0, 0.0); block];
    for seg in spectra.coeffs.chunks_exact(block) {
        for (m, v) in mean.iter_mut().zip(seg) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n_r);
    let coeffs = spectra
        .coeffs
        .chunks_exact(block)
        .flat_map(|seg| seg.iter().zip(&mean).map(|(v, m)| v - m))
        .collect();
    Ok(spectra.with_coeffs(coeffs, true))
}

/// Runs the standard pipeline: optional per-segment detrending of the mean,
/// DFT, optional ensemble-mean removal.
pub fn prepare_spectra(series: &SegmentedSeries, centering: Centering) -> Result<SpectralSet> {
    let spectra = if centering.per_segment() {
        dft_segments(&series.subtract_segment_means())?
    } else {
        dft_segments(series)?
    };
    if centering.ensemble() {
        remove_ensemble_mean(&spectra)
    } else {
        Ok(spectra)
    }
}

/// Hermitian covariance blocks of two coefficient sets at one bin.
///
/// `s_xy = (1/N_R) sum_j X_j Y_j*`; `s_yx` is derived as its adjoint and never
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSpectrum {
    s_xx: CMatrix,
    s_yy: CMatrix,
    s_xy: CMatrix,
    frequency_bin: usize,
    n_segments_used: usize,
}

impl CrossSpectrum {
    pub fn from_samples(x: &BinSamples, y: &BinSamples, frequency_bin: usize) -> Result<Self> {
        if x.n_segments != y.n_segments {
            return Err(Error::SegmentMismatch {
                x: x.n_segments,
                y: y.n_segments,
            });
        }
        if x.n_segments == 0 {
            return Err(Error::TooFewSegments {
                what: "cross-spectrum",
                needed: 1,
                found: 0,
            });
        }
        Ok(Self {
            s_xx: hermitian_covariance(x),
            s_yy: hermitian_covariance(y),
            s_xy: covariance(x, y),
            frequency_bin,
            n_segments_used: x.n_segments,
        })
    }

    /// Builds a cross-spectrum from explicit blocks. `s_xx` and `s_yy` are
    /// made exactly Hermitian.
    pub fn from_blocks(
        s_xx: CMatrix,
        s_yy: CMatrix,
        s_xy: CMatrix,
        frequency_bin: usize,
        n_segments_used: usize,
    ) -> Result<Self> {
        let (p, q) = (s_xx.rows(), s_yy.rows());
        if !s_xx.is_square() || !s_yy.is_square() || s_xy.rows() != p || s_xy.cols() != q || p == 0 || q == 0 {
            return Err(Error::Shape(format!(
                "inconsistent blocks: s_xx {}x{}, s_yy {}x{}, s_xy {}x{}",
                s_xx.rows(),
                s_xx.cols(),
                s_yy.rows(),
                s_yy.cols(),
                s_xy.rows(),
                s_xy.cols()
            )));
        }
        if !(s_xx.is_finite() && s_yy.is_finite() && s_xy.is_finite()) {
            return Err(Error::InvalidParameter("cross-spectrum blocks must be finite".into()));
        }
        Ok(Self {
            s_xx: s_xx.hermitize(),
            s_yy: s_yy.hermitize(),
            s_xy,
            frequency_bin,
            n_segments_used,
        })
    }

    pub fn s_xx(&self) -> &CMatrix {
        &self.s_xx
    }

    pub fn s_yy(&self) -> &CMatrix {
        &self.s_yy
    }

    pub fn s_xy(&self) -> &CMatrix {
        &self.s_xy
    }

    pub fn s_yx(&self) -> CMatrix {
        self.s_xy.adjoint()
    }

    pub fn frequency_bin(&self) -> usize {
        self.frequency_bin
    }

    pub fn n_segments_used(&self) -> usize {
        self.n_segments_used
    }

    pub fn p(&self) -> usize {
        self.s_xx.rows()
    }

    pub fn q(&self) -> usize {
        self.s_yy.rows()
    }

    /// The same covariance with the roles of X and Y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            s_xx: self.s_yy.clone(),
            s_yy: self.s_xx.clone(),
            s_xy: self.s_yx(),
            ..*self
        }
    }

    /// Adds `lambda * mean(diag) * I` to each auto-covariance block.
    pub fn with_ridge(&self, lambda: f64) -> Self {
        Self {
            s_xx: self.s_xx.with_ridge(lambda),
            s_yy: self.s_yy.with_ridge(lambda),
            s_xy: self.s_xy.clone(),
            ..*self
        }
    }
}

fn hermitian_covariance(x: &BinSamples) -> CMatrix {
    let p = x.n_channels;
    let n_r = x.n_segments as f64;
    let mut s = CMatrix::zeros(p, p);
    for a in 0..p {
        let diag: f64 = x.rows().map(|r| r[a].norm_sqr()).sum();
        s[(a, a)] = Complex64::new(diag / n_r, 0.0);
        for b in a + 1..p {
            let v: Complex64 = x.rows().map(|r| r[a] * r[b].conj()).sum::<Complex64>() / n_r;
            s[(a, b)] = v;
            s[(b, a)] = v.conj();
        }
    }
    s
}

fn covariance(x: &BinSamples, y: &BinSamples) -> CMatrix {
    let n_r = x.n_segments as f64;
    CMatrix::from_fn(x.n_channels, y.n_channels, |a, b| {
        x.rows().zip(y.rows()).map(|(rx, ry)| rx[a] * ry[b].conj()).sum::<Complex64>() / n_r
    })
}

/// Cross-spectrum of two centered coefficient sets.
pub fn cross_spectrum(x: &SpectralSet, y: &SpectralSet, bin: usize) -> Result<CrossSpectrum> {
    if !(x.mean_removed && y.mean_removed) {
        return Err(Error::NotCentered);
    }
    cross_spectrum_uncentered(x, y, bin)
}

/// Cross-spectrum without the centering check, for callers that waive the
/// zero-mean assumption (normalized coefficients, uncentered pipelines).
pub fn cross_spectrum_uncentered(x: &SpectralSet, y: &SpectralSet, bin: usize) -> Result<CrossSpectrum> {
    if x.n_segments != y.n_segments {
        return Err(Error::SegmentMismatch {
            x: x.n_segments,
            y: y.n_segments,
        });
    }
    if x.n_freqs != y.n_freqs {
        return Err(Error::Shape(format!(
            "transform lengths differ: {} vs {}",
            x.n_freqs, y.n_freqs
        )));
    }
    CrossSpectrum::from_samples(&x.at_bin(bin)?, &y.at_bin(bin)?, bin)
}
