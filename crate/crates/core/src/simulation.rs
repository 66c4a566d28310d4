//! Synthetic data: zero-lag blurring of a common source, and a source
//! coupled to a circularly delayed copy of itself.
//!
//! Blurring model: `X_jt = C Z_jt + e^x_jt`, `Y_jt = D Z_jt + e^y_jt` with a
//! fresh source `Z` in every segment and i.i.d. Gaussian noise. Generators
//! are pure functions of the scenario; randomness comes from a ChaCha8
//! stream seeded with `seed`, consumed per segment in the order source,
//! X noise, Y noise.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::measure::{evaluate, MeasureId, MeasureSpec};
use crate::spectral::{prepare_spectra, Centering, SegmentedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// `amplitude * cos(2 pi k t / N + phi)` with a uniform random phase per
    /// segment and source channel.
    SinusoidWithJitter,
    /// `z_t = 2 r cos(2 pi k / N) z_{t-1} - r^2 z_{t-2} + amplitude * e_t`.
    Ar2Oscillator,
    WhiteNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub frequency_bin: Option<usize>,
    pub damping: Option<f64>,
    pub amplitude: f64,
}

impl SourceSpec {
    pub fn sinusoid(frequency_bin: usize, amplitude: f64) -> Self {
        Self {
            kind: SourceKind::SinusoidWithJitter,
            frequency_bin: Some(frequency_bin),
            damping: None,
            amplitude,
        }
    }

    pub fn ar2(frequency_bin: usize, damping: f64, amplitude: f64) -> Self {
        Self {
            kind: SourceKind::Ar2Oscillator,
            frequency_bin: Some(frequency_bin),
            damping: Some(damping),
            amplitude,
        }
    }

    pub fn white_noise(amplitude: f64) -> Self {
        Self {
            kind: SourceKind::WhiteNoise,
            frequency_bin: None,
            damping: None,
            amplitude,
        }
    }

    fn validate(&self, n_samples: usize) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "source amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        match self.kind {
            SourceKind::SinusoidWithJitter | SourceKind::Ar2Oscillator => match self.frequency_bin {
                Some(k) if k < n_samples => {}
                Some(k) => {
                    return Err(Error::InvalidParameter(format!(
                        "source bin {k} out of range for {n_samples} samples"
                    )))
                }
                None => return Err(Error::InvalidParameter(format!("{:?} source needs a frequency bin", self.kind))),
            },
            SourceKind::WhiteNoise => {}
        }
        if self.kind == SourceKind::Ar2Oscillator {
            match self.damping {
                Some(r) if r > 0.0 && r < 1.0 => {}
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "AR(2) damping must lie in (0, 1), got {other:?}"
                    )))
                }
            }
        }
        Ok(())
    }

    /// One segment of one source channel.
    fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self.kind {
            SourceKind::SinusoidWithJitter => {
                let k = self.frequency_bin.unwrap_or(0) as f64;
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                (0..n)
                    .map(|t| self.amplitude * (2.0 * PI * k * t as f64 / n as f64 + phase).cos())
                    .collect()
            }
            SourceKind::Ar2Oscillator => {
                let k = self.frequency_bin.unwrap_or(0) as f64;
                let r = self.damping.unwrap_or(0.9);
                let a1 = 2.0 * r * (2.0 * PI * k / n as f64).cos();
                let a2 = -r * r;
                let burn_in = 4 * n + 100;
                let (mut z1, mut z2) = (0.0, 0.0);
                let mut out = Vec::with_capacity(n);
                for step in 0..burn_in + n {
                    let e: f64 = rng.sample(StandardNormal);
                    let z = a1 * z1 + a2 * z2 + self.amplitude * e;
                    z2 = z1;
                    z1 = z;
                    if step >= burn_in {
                        out.push(z);
                    }
                }
                out
            }
            SourceKind::WhiteNoise => (0..n)
                .map(|_| self.amplitude * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlurringScenario {
    /// `p x r` mixing of the source into X.
    pub mixing_c: RMatrix,
    /// `q x r` mixing of the source into Y.
    pub mixing_d: RMatrix,
    pub source: SourceSpec,
    pub noise_std_x: f64,
    pub noise_std_y: f64,
    pub n_segments: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl BlurringScenario {
    fn validate(&self) -> Result<()> {
        if self.mixing_c.cols() != self.mixing_d.cols() || self.mixing_c.cols() == 0 {
            return Err(Error::Shape(format!(
                "mixing matrices must share a positive source dimension: C is {}x{}, D is {}x{}",
                self.mixing_c.rows(),
                self.mixing_c.cols(),
                self.mixing_d.rows(),
                self.mixing_d.cols()
            )));
        }
        if self.mixing_c.rows() == 0 || self.mixing_d.rows() == 0 {
            return Err(Error::Shape("mixing matrices need at least one row".into()));
        }
        if !(self.mixing_c.is_finite() && self.mixing_d.is_finite()) {
            return Err(Error::InvalidParameter("mixing matrices must be finite".into()));
        }
        check_noise(self.noise_std_x)?;
        check_noise(self.noise_std_y)?;
        check_counts(self.n_segments, self.n_samples)?;
        self.source.validate(self.n_samples)
    }

    pub fn source_dim(&self) -> usize {
        self.mixing_c.cols()
    }

    /// Same scenario with both mixing matrices multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            mixing_c: self.mixing_c.scale(gain),
            mixing_d: self.mixing_d.scale(gain),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaggedCouplingScenario {
    pub lag_samples: usize,
    pub coupling_gain: f64,
    pub source: SourceSpec,
    pub noise_std: f64,
    pub n_segments: usize,
    pub n_samples: usize,
    pub seed: u64,
}

fn check_noise(std: f64) -> Result<()> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise std must be >= 0, got {std}")));
    }
    Ok(())
}

fn check_counts(n_segments: usize, n_samples: usize) -> Result<()> {
    if n_segments < 1 || n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1 segment of 2 samples, got {n_segments} x {n_samples}"
        )));
    }
    Ok(())
}

fn draw_noise(rng: &mut ChaCha8Rng, n: usize, channels: usize, std: f64) -> Vec<f64> {
    (0..n * channels).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Draws `(X, Y)` from the blurring model.
pub fn generate_blurring(scenario: &BlurringScenario) -> Result<(SegmentedSeries, SegmentedSeries)> {
    scenario.validate()?;
    let (p, q, r) = (scenario.mixing_c.rows(), scenario.mixing_d.rows(), scenario.source_dim());
    let n = scenario.n_samples;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut xs = Vec::with_capacity(scenario.n_segments * n * p);
    let mut ys = Vec::with_capacity(scenario.n_segments * n * q);
    for _ in 0..scenario.n_segments {
        let z: Vec<Vec<f64>> = (0..r).map(|_| scenario.source.draw(n, &mut rng)).collect();
        let ex = draw_noise(&mut rng, n, p, scenario.noise_std_x);
        let ey = draw_noise(&mut rng, n, q, scenario.noise_std_y);
        for t in 0..n {
            for c in 0..p {
                let mixed: f64 = (0..r).map(|k| scenario.mixing_c[(c, k)] * z[k][t]).sum();
                xs.push(mixed + ex[t * p + c]);
            }
            for c in 0..q {
                let mixed: f64 = (0..r).map(|k| scenario.mixing_d[(c, k)] * z[k][t]).sum();
                ys.push(mixed + ey[t * q + c]);
            }
        }
    }
    Ok((
        SegmentedSeries::new(xs, scenario.n_segments, n, p)?,
        SegmentedSeries::new(ys, scenario.n_segments, n, q)?,
    ))
}

/// Draws a univariate pair where `Y(t) = gain * Z(t - lag)` (circular within
/// the segment) and `X(t) = Z(t)`, each plus noise.
pub fn generate_lagged(scenario: &LaggedCouplingScenario) -> Result<(SegmentedSeries, SegmentedSeries)> {
    check_counts(scenario.n_segments, scenario.n_samples)?;
    let n = scenario.n_samples;
    if scenario.lag_samples >= n {
        return Err(Error::InvalidParameter(format!(
            "lag {} must be smaller than the segment length {n}",
            scenario.lag_samples
        )));
    }
    if !scenario.coupling_gain.is_finite() {
        return Err(Error::InvalidParameter("coupling gain must be finite".into()));
    }
    check_noise(scenario.noise_std)?;
    scenario.source.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut xs = Vec::with_capacity(scenario.n_segments * n);
    let mut ys = Vec::with_capacity(scenario.n_segments * n);
    for _ in 0..scenario.n_segments {
        let z = scenario.source.draw(n, &mut rng);
        let ex = draw_noise(&mut rng, n, 1, scenario.noise_std);
        let ey = draw_noise(&mut rng, n, 1, scenario.noise_std);
        for t in 0..n {
            xs.push(z[t] + ex[t]);
            let delayed = z[(t + n - scenario.lag_samples) % n];
            ys.push(scenario.coupling_gain * delayed + ey[t]);
        }
    }
    Ok((
        SegmentedSeries::new(xs, scenario.n_segments, n, 1)?,
        SegmentedSeries::new(ys, scenario.n_segments, n, 1)?,
    ))
}

/// Measures at the source bin for one mixing gain.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrRow {
    pub gain: f64,
    pub coherence: f64,
    pub lagged_coherence: f64,
    pub phase_sync: f64,
    pub lagged_phase_sync: f64,
    /// Only for univariate X and Y.
    pub imag_coherency: Option<f64>,
    pub pli: Option<f64>,
}

/// Regenerates the scenario (same seed) with `C` and `D` scaled by each gain
/// and evaluates all measures at the source bin, after full centering.
pub fn snr_sweep(scenario: &BlurringScenario, gains: &[f64]) -> Result<Vec<SnrRow>> {
    if gains.len() < 2 {
        return Err(Error::InvalidParameter("an SNR sweep needs at least two gains".into()));
    }
    if let Some(g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidParameter(format!("gains must be positive, got {g}")));
    }
    let bin = scenario
        .source
        .frequency_bin
        .ok_or_else(|| Error::InvalidParameter("SNR sweep needs a source with a frequency bin".into()))?;
    gains
        .par_iter()
        .map(|&gain| {
            let (x, y) = generate_blurring(&scenario.scaled(gain))?;
            let xs = prepare_spectra(&x, Centering::Both)?.at_bin(bin)?;
            let ys = prepare_spectra(&y, Centering::Both)?.at_bin(bin)?;
            let eval = |id| evaluate(&xs, &ys, bin, &MeasureSpec::new(id)).map(|r| r.value);
            let univariate = x.n_channels() == 1 && y.n_channels() == 1;
            Ok(SnrRow {
                gain,
                coherence: eval(MeasureId::CoherenceGeneral)?,
                lagged_coherence: eval(MeasureId::LaggedCoherenceGeneral)?,
                phase_sync: eval(MeasureId::PsGeneral)?,
                lagged_phase_sync: eval(MeasureId::LaggedPsGeneral)?,
                imag_coherency: if univariate { Some(eval(MeasureId::ImagCoherency)?) } else { None },
                pli: if univariate { Some(eval(MeasureId::Pli)?) } else { None },
            })
        })
        .collect()
}
