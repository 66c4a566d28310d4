//! Lagged (zero-lag removed) coherence and phase synchronization.
//!
//! The instantaneous part of a Hermitian covariance is its real part, so the
//! lagged measures condition on it: `rho_GL^2 = 1 - |S_ZZ| / |Re(S_ZZ)|`
//! where `S_ZZ` is the joint covariance of `Z = (Y; X)`. For a positive
//! semidefinite `S`, `0 <= |S| <= |Re(S)|`, so the value lies in `[0, 1]`.
//!
//! When `Re(S_ZZ)` is rank deficient the null space of `Re(S_ZZ)` is also a
//! null space of `S_ZZ` (for real `v`, `v^T S v = v^T Re(S) v`), and both
//! determinants are taken on a principal submatrix spanning the range of the
//! real part. This is the limit of the ratio under a vanishing ridge and is
//! what makes purely instantaneous mixing give exactly zero.

use num_complex::Complex64;

use crate::coherence::{check_rank, RCOND_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::{psd_log_det, CMatrix, Cholesky, PivotedCholesky};
use crate::measure::{check_univariate, clamp_signed, clamp_unit, MeasureId, MeasureResult};
use crate::phase_sync::{normalize_pair, DegeneratePolicy, Normalization, NormalizationKind};
use crate::spectral::{BinSamples, CrossSpectrum, SpectralSet};

/// Hermitian covariance of the stacked series `Z = (Y; X)`, laid out as
/// `[[S_YY, S_YX], [S_XY, S_XX]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCovariance {
    s_zz: CMatrix,
    q: usize,
    p: usize,
    frequency_bin: usize,
    n_segments_used: usize,
}

impl JointCovariance {
    /// Wraps an explicit `(q + p)`-square Hermitian matrix.
    pub fn from_matrix(s_zz: CMatrix, q: usize, p: usize, frequency_bin: usize, n_segments_used: usize) -> Result<Self> {
        if !s_zz.is_square() || s_zz.rows() != p + q || p == 0 || q == 0 {
            return Err(Error::Shape(format!(
                "joint covariance must be {0}x{0} for q = {q}, p = {p}; got {1}x{2}",
                p + q,
                s_zz.rows(),
                s_zz.cols()
            )));
        }
        Ok(Self {
            s_zz: s_zz.hermitize(),
            q,
            p,
            frequency_bin,
            n_segments_used,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.s_zz
    }

    /// `(q, p)`: sizes of the Y block and the X block.
    pub fn block_dims(&self) -> (usize, usize) {
        (self.q, self.p)
    }

    pub fn frequency_bin(&self) -> usize {
        self.frequency_bin
    }

    pub fn s_yy(&self) -> CMatrix {
        self.s_zz.submatrix(0, 0, self.q, self.q)
    }

    pub fn s_yx(&self) -> CMatrix {
        self.s_zz.submatrix(0, self.q, self.q, self.p)
    }

    pub fn s_xy(&self) -> CMatrix {
        self.s_zz.submatrix(self.q, 0, self.p, self.q)
    }

    pub fn s_xx(&self) -> CMatrix {
        self.s_zz.submatrix(self.q, self.q, self.p, self.p)
    }

    fn check_rank(&self, what: &'static str) -> Result<()> {
        let needed = self.p + self.q;
        if self.n_segments_used < needed {
            return Err(Error::TooFewSegments {
                what,
                needed,
                found: self.n_segments_used,
            });
        }
        Ok(())
    }
}

pub fn joint_covariance(cs: &CrossSpectrum) -> JointCovariance {
    JointCovariance {
        s_zz: CMatrix::from_blocks(cs.s_yy(), &cs.s_yx(), cs.s_xy(), cs.s_xx()),
        q: cs.q(),
        p: cs.p(),
        frequency_bin: cs.frequency_bin(),
        n_segments_used: cs.n_segments_used(),
    }
}

/// `|S| / |Re(S)|` for Hermitian positive semidefinite `S`, restricted to
/// the range of `Re(S)`.
pub(crate) fn lagged_ratio(s: &CMatrix) -> Result<f64> {
    let re = s.real_part();
    let piv = PivotedCholesky::factor(&re, RCOND_THRESHOLD);
    if piv.rank == 0 {
        return Err(Error::Singular {
            matrix: "re(s_zz)",
            rcond: 0.0,
        });
    }
    let (s_k, re_k) = if piv.rank == s.rows() {
        (s.clone(), re)
    } else {
        (s.principal_submatrix(piv.kept()), re.principal_submatrix(piv.kept()))
    };
    let ch_re = Cholesky::factor(&re_k).map_err(|_| Error::Singular {
        matrix: "re(s_zz)",
        rcond: piv.rcond,
    })?;
    let log_num = psd_log_det(&s_k).map_err(|f| Error::NotPositiveSemidefinite {
        matrix: "s_zz",
        index: f.index,
        pivot: f.pivot,
    })?;
    Ok((log_num - ch_re.log_det()).exp())
}

/// Squared general lagged coherence.
pub fn general_lagged_coherence(jc: &JointCovariance) -> Result<MeasureResult> {
    let id = MeasureId::LaggedCoherenceGeneral;
    jc.check_rank("general lagged coherence")?;
    let value = clamp_unit(id, 1.0 - lagged_ratio(&jc.s_zz)?)?;
    Ok(MeasureResult::new(id, jc.frequency_bin, value, jc.n_segments_used))
}

/// General lagged phase synchronization from an already normalized joint
/// covariance.
pub fn general_lagged_phase_sync_from_joint(jc: &JointCovariance) -> Result<MeasureResult> {
    let id = MeasureId::LaggedPsGeneral;
    jc.check_rank("general lagged phase synchronization")?;
    let squared = clamp_unit(id, 1.0 - lagged_ratio(&jc.s_zz)?)?;
    Ok(MeasureResult::new(id, jc.frequency_bin, squared.sqrt(), jc.n_segments_used))
}

pub(crate) fn general_lagged_phase_sync_samples(
    x: &BinSamples,
    y: &BinSamples,
    bin: usize,
    norm: Normalization,
    ridge: Option<f64>,
) -> Result<MeasureResult> {
    let (xn, yn) = normalize_pair(x, y, bin, norm)?;
    let mut cs = CrossSpectrum::from_samples(&xn, &yn, bin)?;
    if let Some(lambda) = ridge {
        cs = cs.with_ridge(lambda);
    }
    check_rank(&cs, "general lagged phase synchronization")?;
    Ok(general_lagged_phase_sync_from_joint(&joint_covariance(&cs))?.normalized(norm.kind))
}

/// Normalizes both sets at `bin` and returns
/// `sqrt(1 - |S~| / |Re(S~)|)` of the normalized joint covariance.
pub fn general_lagged_phase_sync(
    x: &SpectralSet,
    y: &SpectralSet,
    bin: usize,
    norm: impl Into<Normalization>,
) -> Result<MeasureResult> {
    general_lagged_phase_sync_samples(&x.at_bin(bin)?, &y.at_bin(bin)?, bin, norm.into(), None)
}

/// `Im(s_yx) / sqrt(s_yy s_xx - Re(s_yx)^2)`: the signed univariate lagged
/// coherence.
pub fn signed_lagged_coherence(s_xx: f64, s_yy: f64, s_yx: Complex64) -> Result<f64> {
    let scale = s_xx * s_yy;
    if !(scale > 0.0) {
        return Err(Error::Singular {
            matrix: "re(s_zz)",
            rcond: 0.0,
        });
    }
    let denom = scale - s_yx.re * s_yx.re;
    // Real parts collinear: same range restriction as the determinant form.
    if denom <= RCOND_THRESHOLD * scale {
        return Ok(0.0);
    }
    clamp_signed(MeasureId::LaggedCoherenceUnivariate, s_yx.im / denom.sqrt())
}

fn scalar_blocks(cs: &CrossSpectrum, id: MeasureId) -> Result<(f64, f64, Complex64)> {
    check_univariate(id, cs.p(), cs.q())?;
    Ok((cs.s_xx()[(0, 0)].re, cs.s_yy()[(0, 0)].re, cs.s_yx()[(0, 0)]))
}

pub fn lagged_coherence_univariate_signed(cs: &CrossSpectrum) -> Result<MeasureResult> {
    let id = MeasureId::LaggedCoherenceUnivariate;
    let (s_xx, s_yy, s_yx) = scalar_blocks(cs, id)?;
    let value = signed_lagged_coherence(s_xx, s_yy, s_yx)?;
    let mut r = MeasureResult::new(id, cs.frequency_bin(), value, cs.n_segments_used());
    r.squared = false;
    Ok(r)
}

/// `Im(s_yx) / sqrt(s_yy s_xx)`.
pub fn imaginary_coherency_value(s_xx: f64, s_yy: f64, s_yx: Complex64) -> Result<f64> {
    if !(s_xx > 0.0) {
        return Err(Error::ZeroVariance { what: "x" });
    }
    if !(s_yy > 0.0) {
        return Err(Error::ZeroVariance { what: "y" });
    }
    clamp_signed(MeasureId::ImagCoherency, s_yx.im / (s_yy * s_xx).sqrt())
}

pub fn imaginary_coherency(cs: &CrossSpectrum) -> Result<MeasureResult> {
    let id = MeasureId::ImagCoherency;
    let (s_xx, s_yy, s_yx) = scalar_blocks(cs, id)?;
    let value = imaginary_coherency_value(s_xx, s_yy, s_yx)?;
    Ok(MeasureResult::new(id, cs.frequency_bin(), value, cs.n_segments_used()))
}

/// Univariate lagged phase synchronization from the normalized covariance
/// `s = s_xy` of unit-modulus coefficients: `sqrt(Im(s)^2 / (1 - Re(s)^2))`.
pub fn lagged_phase_sync_closed_form(s: Complex64) -> Result<f64> {
    let denom = 1.0 - s.re * s.re;
    if denom <= RCOND_THRESHOLD {
        return Ok(0.0);
    }
    clamp_unit(MeasureId::LaggedPsUnivariate, s.im * s.im / denom).map(f64::sqrt)
}

pub(crate) fn lagged_phase_sync_univariate_samples(
    x: &BinSamples,
    y: &BinSamples,
    bin: usize,
    policy: DegeneratePolicy,
) -> Result<MeasureResult> {
    let id = MeasureId::LaggedPsUnivariate;
    check_univariate(id, x.n_channels(), y.n_channels())?;
    let norm = Normalization {
        kind: NormalizationKind::VariableWise,
        degenerate: policy,
    };
    let (xn, yn) = normalize_pair(x, y, bin, norm)?;
    let n = xn.n_segments();
    let s: Complex64 = xn.as_slice().iter().zip(yn.as_slice()).map(|(a, b)| a * b.conj()).sum::<Complex64>() / n as f64;
    Ok(MeasureResult::new(id, bin, lagged_phase_sync_closed_form(s)?, n))
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn phase_lag_index_samples(x: &BinSamples, y: &BinSamples, bin: usize) -> Result<MeasureResult> {
    let id = MeasureId::Pli;
    check_univariate(id, x.n_channels(), y.n_channels())?;
    if x.n_segments() != y.n_segments() {
        return Err(Error::SegmentMismatch {
            x: x.n_segments(),
            y: y.n_segments(),
        });
    }
    let n = x.n_segments();
    let total: f64 = x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(xv, yv)| sign((yv * xv.conj()).im))
        .sum();
    Ok(MeasureResult::new(id, bin, (total / n as f64).abs(), n))
}

/// `|mean_j sign(Im(y_j x_j*))|`, with `sign(0) = 0`.
pub fn phase_lag_index(x: &SpectralSet, y: &SpectralSet, bin: usize) -> Result<MeasureResult> {
    phase_lag_index_samples(&x.at_bin(bin)?, &y.at_bin(bin)?, bin)
}
