//! Measure identities, results, and a single dispatch point used by the
//! permutation test and the analysis pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_sync::{Normalization, NormalizationKind};
use crate::spectral::{BinSamples, CrossSpectrum};
use crate::{coherence, lagged, phase_sync};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    CoherenceGeneral,
    CoherenceClassical,
    PsGeneral,
    PsClassical,
    LaggedCoherenceGeneral,
    LaggedCoherenceUnivariate,
    LaggedPsGeneral,
    LaggedPsUnivariate,
    ImagCoherency,
    Pli,
}

impl MeasureId {
    pub const ALL: [MeasureId; 10] = [
        MeasureId::CoherenceGeneral,
        MeasureId::CoherenceClassical,
        MeasureId::PsGeneral,
        MeasureId::PsClassical,
        MeasureId::LaggedCoherenceGeneral,
        MeasureId::LaggedCoherenceUnivariate,
        MeasureId::LaggedPsGeneral,
        MeasureId::LaggedPsUnivariate,
        MeasureId::ImagCoherency,
        MeasureId::Pli,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureId::CoherenceGeneral => "coherence_general",
            MeasureId::CoherenceClassical => "coherence_classical",
            MeasureId::PsGeneral => "ps_general",
            MeasureId::PsClassical => "ps_classical",
            MeasureId::LaggedCoherenceGeneral => "lagged_coherence_general",
            MeasureId::LaggedCoherenceUnivariate => "lagged_coherence_univariate",
            MeasureId::LaggedPsGeneral => "lagged_ps_general",
            MeasureId::LaggedPsUnivariate => "lagged_ps_univariate",
            MeasureId::ImagCoherency => "imag_coherency",
            MeasureId::Pli => "pli",
        }
    }

    /// Measures defined only for a pair of scalar series.
    pub fn requires_univariate(self) -> bool {
        matches!(
            self,
            MeasureId::CoherenceClassical
                | MeasureId::PsClassical
                | MeasureId::LaggedCoherenceUnivariate
                | MeasureId::LaggedPsUnivariate
                | MeasureId::ImagCoherency
                | MeasureId::Pli
        )
    }

    /// Measures whose value carries a sign and lies in `[-1, 1]`.
    pub fn is_signed(self) -> bool {
        matches!(self, MeasureId::LaggedCoherenceUnivariate | MeasureId::ImagCoherency)
    }

    /// Whether the reported value is the squared form.
    pub fn is_squared(self) -> bool {
        matches!(
            self,
            MeasureId::CoherenceGeneral | MeasureId::CoherenceClassical | MeasureId::LaggedCoherenceGeneral
        )
    }

    /// Measures computed from amplitude-normalized coefficients.
    pub fn uses_normalization(self) -> bool {
        matches!(self, MeasureId::PsGeneral | MeasureId::LaggedPsGeneral)
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown measure `{s}`")))
    }
}

/// Value of one connectivity measure at one frequency bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub measure_id: MeasureId,
    pub frequency_bin: usize,
    pub value: f64,
    pub squared: bool,
    pub normalization: Option<NormalizationKind>,
    /// Segments that entered the estimate; smaller than the input count only
    /// when degenerate segments were dropped.
    pub n_segments_used: usize,
}

impl MeasureResult {
    pub(crate) fn new(measure_id: MeasureId, frequency_bin: usize, value: f64, n_segments_used: usize) -> Self {
        Self {
            measure_id,
            frequency_bin,
            value,
            squared: measure_id.is_squared(),
            normalization: None,
            n_segments_used,
        }
    }

    pub(crate) fn normalized(mut self, kind: NormalizationKind) -> Self {
        self.normalization = Some(kind);
        self
    }
}

/// Rounding allowance outside `[0, 1]` (or `[-1, 1]`) before a value is
/// treated as a numerical failure.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

pub(crate) fn clamp_unit(measure: MeasureId, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else if (-CLAMP_TOLERANCE..0.0).contains(&value) {
        Ok(0.0)
    } else if value > 1.0 && value <= 1.0 + CLAMP_TOLERANCE {
        Ok(1.0)
    } else {
        Err(Error::NumericalFailure { measure, value })
    }
}

pub(crate) fn clamp_signed(measure: MeasureId, value: f64) -> Result<f64> {
    if value.is_nan() || value.abs() > 1.0 + CLAMP_TOLERANCE {
        Err(Error::NumericalFailure { measure, value })
    } else {
        Ok(value.clamp(-1.0, 1.0))
    }
}

/// Everything needed to evaluate one measure on a pair of coefficient sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSpec {
    pub id: MeasureId,
    pub normalization: Normalization,
    /// Optional ridge `lambda`: `lambda * mean(diag) * I` is added to each
    /// auto-covariance block before any determinant ratio. Off by default.
    pub ridge: Option<f64>,
}

impl MeasureSpec {
    pub fn new(id: MeasureId) -> Self {
        Self {
            id,
            normalization: Normalization::default(),
            ridge: None,
        }
    }

    pub fn with_normalization(mut self, normalization: impl Into<Normalization>) -> Self {
        self.normalization = normalization.into();
        self
    }

    pub fn with_ridge(mut self, lambda: f64) -> Self {
        self.ridge = Some(lambda);
        self
    }

    pub(crate) fn apply_ridge(&self, cs: CrossSpectrum) -> CrossSpectrum {
        match self.ridge {
            Some(lambda) => cs.with_ridge(lambda),
            None => cs,
        }
    }
}

impl From<MeasureId> for MeasureSpec {
    fn from(id: MeasureId) -> Self {
        Self::new(id)
    }
}

pub(crate) fn check_univariate(measure: MeasureId, p: usize, q: usize) -> Result<()> {
    if p != 1 || q != 1 {
        return Err(Error::NotUnivariate { measure, p, q });
    }
    Ok(())
}

/// Evaluates `spec` on the coefficient vectors of X and Y at one bin.
///
/// Coherence-type measures use the samples as given; phase-synchronization
/// measures normalize them first.
pub fn evaluate(x: &BinSamples, y: &BinSamples, bin: usize, spec: &MeasureSpec) -> Result<MeasureResult> {
    use MeasureId::*;
    if spec.id.requires_univariate() {
        check_univariate(spec.id, x.n_channels(), y.n_channels())?;
    }
    match spec.id {
        CoherenceGeneral => {
            let cs = spec.apply_ridge(CrossSpectrum::from_samples(x, y, bin)?);
            coherence::general_coherence(&cs)
        }
        CoherenceClassical => coherence::classical_coherence(&CrossSpectrum::from_samples(x, y, bin)?),
        PsGeneral => phase_sync::general_phase_sync_samples(x, y, bin, spec.normalization, spec.ridge),
        PsClassical => phase_sync::classical_phase_sync_samples(x, y, bin, spec.normalization.degenerate),
        LaggedCoherenceGeneral => {
            let cs = spec.apply_ridge(CrossSpectrum::from_samples(x, y, bin)?);
            lagged::general_lagged_coherence(&lagged::joint_covariance(&cs))
        }
        LaggedCoherenceUnivariate => {
            lagged::lagged_coherence_univariate_signed(&CrossSpectrum::from_samples(x, y, bin)?)
        }
        LaggedPsGeneral => lagged::general_lagged_phase_sync_samples(x, y, bin, spec.normalization, spec.ridge),
        LaggedPsUnivariate => lagged::lagged_phase_sync_univariate_samples(x, y, bin, spec.normalization.degenerate),
        ImagCoherency => lagged::imaginary_coherency(&CrossSpectrum::from_samples(x, y, bin)?),
        Pli => lagged::phase_lag_index_samples(x, y, bin),
    }
}
