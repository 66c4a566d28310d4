//! Time-domain check that the real part of a Hermitian covariance is the
//! zero-lag covariance of the single-frequency filtered signal:
//! `Re(S_ZZ(w)) = (N^2 / 2) A(w)` with
//! `A(w) = (1 / (N N_R)) sum_j sum_t z_jt z_jt^T` over the filtered samples.
//!
//! This path shares no code with the cross-spectrum beyond the forward DFT
//! inside the filter.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::spectral::{cross_spectrum_uncentered, dft_segments, SegmentedSeries};

/// Imaginary residue (relative to the largest sample) tolerated after the
/// inverse transform of a conjugate-symmetric spectrum.
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-8;

/// A series reduced to a single DFT bin pair `{w, N - w}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSeries {
    pub data: SegmentedSeries,
    pub frequency_bin: usize,
    /// `w = 0` or `w = N/2`: the bin has no distinct conjugate partner.
    pub edge_bin: bool,
}

fn is_edge(bin: usize, n: usize) -> bool {
    bin == 0 || (n % 2 == 0 && bin == n / 2)
}

/// Ideal DFT-domain band selection: keep bins `w` and `N - w`, zero the rest.
pub fn filter_single_frequency(series: &SegmentedSeries, bin: usize) -> Result<FilteredSeries> {
    let n = series.n_samples();
    if bin >= n {
        return Err(Error::BinOutOfRange { bin, n_freqs: n });
    }
    let p = series.n_channels();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let partner = (n - bin) % n;
    let scale = series.as_slice().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(series.as_slice().len());
    let mut columns = vec![vec![0.0; n]; p];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..series.n_segments() {
        for (c, col) in columns.iter_mut().enumerate() {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(series.value(j, t, c), 0.0);
            }
            forward.process(&mut buf);
            for (w, b) in buf.iter_mut().enumerate() {
                if w != bin && w != partner {
                    *b = Complex64::new(0.0, 0.0);
                }
            }
            inverse.process(&mut buf);
            for (t, b) in buf.iter().enumerate() {
                let z = b / n as f64;
                if z.im.abs() > IMAGINARY_RESIDUE_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::Internal(format!(
                        "filtered sample has imaginary residue {:e} (segment {j}, channel {c})",
                        z.im
                    )));
                }
                col[t] = z.re;
            }
        }
        for t in 0..n {
            out.extend(columns.iter().map(|col| col[t]));
        }
    }
    let mut data = SegmentedSeries::new(out, series.n_segments(), n, p)?;
    if let Some(hz) = series.sample_rate_hz() {
        data = data.with_sample_rate(hz)?;
    }
    Ok(FilteredSeries {
        data,
        frequency_bin: bin,
        edge_bin: is_edge(bin, n),
    })
}

/// Zero-lag covariance `(1 / (N N_R)) sum_j sum_t z z^T`.
pub fn time_domain_covariance(fs: &FilteredSeries) -> RMatrix {
    let s = &fs.data;
    let r = s.n_channels();
    let mut a = RMatrix::zeros(r, r);
    for j in 0..s.n_segments() {
        for t in 0..s.n_samples() {
            for u in 0..r {
                let zu = s.value(j, t, u);
                for v in u..r {
                    a[(u, v)] += zu * s.value(j, t, v);
                }
            }
        }
    }
    let norm = (s.n_samples() * s.n_segments()) as f64;
    for u in 0..r {
        for v in u..r {
            let val = a[(u, v)] / norm;
            a[(u, v)] = val;
            a[(v, u)] = val;
        }
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParsevalOptions {
    /// Remove the ensemble mean before the cross-spectrum.
    pub spectral_centered: bool,
    /// Remove the ensemble mean before filtering.
    pub filter_centered: bool,
    /// Allow `w = 0` and `w = N/2`, where the constant is `N^2` instead of
    /// `N^2 / 2`.
    pub include_edge_bins: bool,
}

impl ParsevalOptions {
    pub fn centered() -> Self {
        Self {
            spectral_centered: true,
            filter_centered: true,
            include_edge_bins: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsevalReport {
    pub frequency_bin: usize,
    /// `Re(S_ZZ)` from the spectral path.
    pub lhs: RMatrix,
    /// `constant * A` from the filter path.
    pub rhs: RMatrix,
    pub constant: f64,
    /// `max |lhs - rhs| / max |lhs|` (0 when both vanish).
    pub max_abs_rel_error: f64,
    /// Largest per-channel total spectral power `(1 / N_R) sum_j sum_w |X_jw|^2`.
    pub total_power: f64,
    /// The bin holds less than [`NEGLIGIBLE_POWER`] of the total power, so
    /// its relative error is dominated by round-off; such a bin passes when
    /// `max |lhs - rhs| <= PARSEVAL_TOLERANCE * total_power`.
    pub negligible_power: bool,
    pub edge_bin: bool,
    pub passed: bool,
}

pub const PARSEVAL_TOLERANCE: f64 = 1e-9;

/// Fraction of the total power below which a bin counts as empty.
pub const NEGLIGIBLE_POWER: f64 = 1e-6;

/// Computes both sides of the identity at one bin.
pub fn verify_parseval_identity(
    series: &SegmentedSeries,
    bin: usize,
    options: ParsevalOptions,
) -> Result<ParsevalReport> {
    if options.spectral_centered != options.filter_centered {
        return Err(Error::Config(
            "spectral and filter paths must both be centered or both uncentered".into(),
        ));
    }
    let n = series.n_samples();
    if bin >= n {
        return Err(Error::BinOutOfRange { bin, n_freqs: n });
    }
    let edge = is_edge(bin, n);
    if edge && !options.include_edge_bins {
        return Err(Error::InvalidParameter(format!(
            "bin {bin} has no conjugate partner for N = {n}; enable edge bins to check it"
        )));
    }

    let spectra = dft_segments(series)?;
    let spectra = if options.spectral_centered {
        crate::spectral::remove_ensemble_mean(&spectra)?
    } else {
        spectra
    };
    let cs = cross_spectrum_uncentered(&spectra, &spectra, bin)?;
    let lhs = cs.s_xx().real_part();

    let filtered_input = if options.filter_centered {
        series.subtract_ensemble_mean()
    } else {
        series.clone()
    };
    let fs = filter_single_frequency(&filtered_input, bin)?;
    let nf = n as f64;
    let constant = if edge { nf * nf } else { nf * nf / 2.0 };
    let rhs = time_domain_covariance(&fs).scale(constant);

    let total_power = (0..series.n_channels())
        .map(|c| {
            (0..series.n_segments())
                .flat_map(|j| (0..n).map(move |t| (j, t)))
                .map(|(j, t)| series.value(j, t, c).powi(2))
                .sum::<f64>()
                * n as f64
                / series.n_segments() as f64
        })
        .fold(0.0, f64::max);
    let denom = lhs.max_abs();
    let diff = lhs.max_abs_diff(&rhs);
    let negligible_power = denom < NEGLIGIBLE_POWER * total_power;
    let max_abs_rel_error = if denom > 0.0 {
        diff / denom
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ParsevalReport {
        frequency_bin: bin,
        lhs,
        rhs,
        constant,
        max_abs_rel_error,
        total_power,
        negligible_power,
        edge_bin: edge,
        passed: max_abs_rel_error <= PARSEVAL_TOLERANCE
            || (negligible_power && diff <= PARSEVAL_TOLERANCE * total_power),
    })
}
