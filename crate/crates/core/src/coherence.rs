//! General (multivariate) coherence as a ratio of conditional-covariance
//! determinants.
//!
//! `rho_G^2 = 1 - |S_YY/X| / |S_YY|` with
//! `S_YY/X = S_YY - S_YX S_XX^-1 S_XY`, the residual covariance of Y after
//! linear prediction from X. For scalars it is the ordinary squared
//! coherence; it is symmetric in X and Y and invariant under invertible
//! linear transforms of either series.

use crate::error::{Error, Result};
use crate::linalg::{psd_log_det_scaled, CMatrix, Cholesky};
use crate::measure::{check_univariate, clamp_unit, MeasureId, MeasureResult};
use crate::spectral::CrossSpectrum;

/// Matrices whose reciprocal condition estimate falls below this are
/// treated as singular.
pub const RCOND_THRESHOLD: f64 = 1e-12;

pub(crate) fn factor_invertible(m: &CMatrix, label: &'static str) -> Result<Cholesky<num_complex::Complex64>> {
    let ch = Cholesky::factor(m).map_err(|_| Error::Singular {
        matrix: label,
        rcond: 0.0,
    })?;
    let rcond = ch.rcond_estimate();
    if rcond < RCOND_THRESHOLD {
        return Err(Error::Singular { matrix: label, rcond });
    }
    Ok(ch)
}

/// `S_YY - S_YX S_XX^-1 S_XY`, returned exactly Hermitian.
pub fn conditional_covariance(s_yy: &CMatrix, s_yx: &CMatrix, s_xx: &CMatrix) -> Result<CMatrix> {
    let (q, p) = (s_yy.rows(), s_xx.rows());
    if !s_yy.is_square() || !s_xx.is_square() || s_yx.rows() != q || s_yx.cols() != p {
        return Err(Error::Shape(format!(
            "conditional covariance needs q x q, q x p, p x p blocks; got {}x{}, {}x{}, {}x{}",
            s_yy.rows(),
            s_yy.cols(),
            s_yx.rows(),
            s_yx.cols(),
            s_xx.rows(),
            s_xx.cols()
        )));
    }
    let ch = factor_invertible(s_xx, "s_xx")?;
    let s_xy = s_yx.adjoint();
    let explained = s_yx.matmul(&ch.solve(&s_xy));
    Ok(s_yy.sub(&explained).hermitize())
}

pub(crate) fn check_rank(cs: &CrossSpectrum, what: &'static str) -> Result<()> {
    let needed = cs.p() + cs.q();
    if cs.n_segments_used() < needed {
        return Err(Error::TooFewSegments {
            what,
            needed,
            found: cs.n_segments_used(),
        });
    }
    Ok(())
}

/// `1 - |S_YY/X| / |S_YY|` from the blocks, before clamping.
pub(crate) fn unexplained_ratio(cs: &CrossSpectrum) -> Result<f64> {
    let ch_yy = factor_invertible(cs.s_yy(), "s_yy")?;
    let residual = conditional_covariance(cs.s_yy(), &cs.s_yx(), cs.s_xx())?;
    let reference = cs.s_yy().diagonal().iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let log_num = psd_log_det_scaled(&residual, reference).map_err(|f| Error::NotPositiveSemidefinite {
        matrix: "conditional covariance",
        index: f.index,
        pivot: f.pivot,
    })?;
    Ok((log_num - ch_yy.log_det()).exp())
}

/// Squared general coherence, conditioning Y on X.
pub fn general_coherence(cs: &CrossSpectrum) -> Result<MeasureResult> {
    check_rank(cs, "general coherence")?;
    let ratio = unexplained_ratio(cs)?;
    let value = clamp_unit(MeasureId::CoherenceGeneral, 1.0 - ratio)?;
    Ok(MeasureResult::new(
        MeasureId::CoherenceGeneral,
        cs.frequency_bin(),
        value,
        cs.n_segments_used(),
    ))
}

/// The same quantity computed in the other orientation, conditioning X on Y.
pub fn general_coherence_x_given_y(cs: &CrossSpectrum) -> Result<MeasureResult> {
    general_coherence(&cs.swapped())
}

/// Ordinary squared coherence `|s_xy|^2 / (s_xx s_yy)` of two scalar series.
pub fn classical_coherence(cs: &CrossSpectrum) -> Result<MeasureResult> {
    let id = MeasureId::CoherenceClassical;
    check_univariate(id, cs.p(), cs.q())?;
    let s_xx = cs.s_xx()[(0, 0)].re;
    let s_yy = cs.s_yy()[(0, 0)].re;
    if !(s_xx > 0.0) {
        return Err(Error::ZeroVariance { what: "x" });
    }
    if !(s_yy > 0.0) {
        return Err(Error::ZeroVariance { what: "y" });
    }
    let value = cs.s_xy()[(0, 0)].norm_sqr() / (s_xx * s_yy);
    Ok(MeasureResult::new(id, cs.frequency_bin(), clamp_unit(id, value)?, cs.n_segments_used()))
}
