//! Coherence and phase synchronization between pairs of multivariate time
//! series, with zero-lag ("instantaneous") contributions partialled out.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`] segments, transforms and averages DFT coefficients into
//!   Hermitian cross-spectral covariance blocks.
//! - [`coherence`], [`phase_sync`] and [`lagged`] compute the connectivity
//!   measures from those blocks.
//! - [`zerolag`] is an independent time-domain path showing that the real
//!   part of a Hermitian covariance is the zero-lag covariance of the
//!   single-frequency filtered signal.
//! - [`simulation`] generates volume-conduction and true-lag scenarios.
//! - [`permutation`] runs segment-shuffling significance tests.
//!
//! All spectral quantities use the unnormalized forward DFT
//! `X_w = sum_t x_t exp(-2 pi i w t / N)` and covariances averaged over
//! segments without any `(2 pi N)^-1` density factor; every measure here is
//! a ratio in which that factor cancels.

pub mod coherence;
pub mod error;
pub mod lagged;
pub mod linalg;
pub mod measure;
pub mod permutation;
pub mod phase_sync;
pub mod simulation;
pub mod spectral;
pub mod zerolag;

pub use num_complex::Complex64;

pub use coherence::{classical_coherence, conditional_covariance, general_coherence};
pub use error::{Error, Result};
pub use lagged::{
    general_lagged_coherence, general_lagged_phase_sync, imaginary_coherency, joint_covariance,
    lagged_coherence_univariate_signed, phase_lag_index, JointCovariance,
};
pub use linalg::{CMatrix, Matrix, RMatrix};
pub use measure::{evaluate, MeasureId, MeasureResult, MeasureSpec};
pub use permutation::{multi_frequency_test, permutation_test, PermutationReport};
pub use phase_sync::{
    classical_phase_sync, general_phase_sync, normalize, DegeneratePolicy, Normalization,
    NormalizationKind,
};
pub use spectral::{
    cross_spectrum, cross_spectrum_uncentered, dft_segments, prepare_spectra,
    remove_ensemble_mean, BinSamples, Centering, CrossSpectrum, SegmentedSeries, SpectralSet,
};
