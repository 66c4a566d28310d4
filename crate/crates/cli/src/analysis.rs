use lagcoh_core::permutation::{derive_sub_seed, permutation_test_samples, MIN_PERMUTATIONS};
use lagcoh_core::{
    evaluate, prepare_spectra, Error, MeasureId, MeasureSpec, Normalization, NormalizationKind, SegmentedSeries,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Seed used for permutation tests when none is configured.
pub const DEFAULT_SEED: u64 = 0;

/// One output line: a measure at a bin, with its permutation p-value when a
/// test was run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub frequency_bin: usize,
    pub frequency_hz: Option<f64>,
    pub measure_id: MeasureId,
    pub value: f64,
    pub squared: bool,
    pub normalization: Option<NormalizationKind>,
    pub p_value: Option<f64>,
}

/// Checks the request against the data shape without computing anything.
pub fn validate(config: &RunConfig, x: &SegmentedSeries, y: &SegmentedSeries) -> Result<(Vec<MeasureId>, Vec<usize>)> {
    if x.n_segments() != y.n_segments() {
        return Err(Error::SegmentMismatch {
            x: x.n_segments(),
            y: y.n_segments(),
        }
        .into());
    }
    if x.n_samples() != y.n_samples() {
        return Err(CliError::Config(format!(
            "X and Y segment lengths differ: {} vs {}",
            x.n_samples(),
            y.n_samples()
        )));
    }
    let (p, q) = (x.n_channels(), y.n_channels());
    let measures = config.measures.resolve(p, q);
    if let Some(&m) = measures.iter().find(|m| m.requires_univariate() && (p != 1 || q != 1)) {
        return Err(CliError::Config(format!("measure {m} requires p = q = 1, data has p = {p}, q = {q}")));
    }
    let bins = config.bins.resolve(x.n_samples(), config.centering);
    if let Some(&b) = bins.iter().find(|&&b| b >= x.n_samples()) {
        return Err(Error::BinOutOfRange {
            bin: b,
            n_freqs: x.n_samples(),
        }
        .into());
    }
    if let Some(n) = config.n_permutations {
        if n < MIN_PERMUTATIONS {
            return Err(CliError::Config(format!(
                "at least {MIN_PERMUTATIONS} permutations are required, got {n}"
            )));
        }
    }
    Ok((measures, bins))
}

/// Center, transform, evaluate every requested measure at every requested
/// bin, and optionally attach permutation p-values. Rows are ordered by
/// `(frequency_bin, measure_id)`.
pub fn run_analysis(config: &RunConfig, x: &SegmentedSeries, y: &SegmentedSeries) -> Result<Vec<ResultRow>> {
    let (measures, bins) = validate(config, x, y)?;
    if bins.is_empty() || measures.is_empty() {
        return Ok(Vec::new());
    }
    let sx = prepare_spectra(x, config.centering)?;
    let sy = prepare_spectra(y, config.centering)?;
    let n = x.n_samples() as f64;
    let hz = x.sample_rate_hz().or(y.sample_rate_hz());
    let norm = Normalization {
        kind: config.normalization,
        degenerate: config.degenerate,
    };
    let seed = config.seed.unwrap_or(DEFAULT_SEED);
    let per_bin: Vec<Vec<ResultRow>> = bins
        .par_iter()
        .map(|&bin| {
            let xs = sx.at_bin(bin)?;
            let ys = sy.at_bin(bin)?;
            measures
                .iter()
                .map(|&id| {
                    let mut spec = MeasureSpec::new(id).with_normalization(norm);
                    spec.ridge = config.ridge;
                    let wrap = |source| CliError::Measure { bin, measure: id, source };
                    let (r, p_value) = match config.n_permutations {
                        None => (evaluate(&xs, &ys, bin, &spec).map_err(wrap)?, None),
                        Some(n_perm) => {
                            let r = evaluate(&xs, &ys, bin, &spec).map_err(wrap)?;
                            let rep = permutation_test_samples(&xs, &ys, bin, &spec, n_perm, derive_sub_seed(seed, bin))
                                .map_err(wrap)?;
                            (r, Some(rep.p_value))
                        }
                    };
                    Ok(ResultRow {
                        frequency_bin: bin,
                        frequency_hz: hz.map(|fs| bin as f64 * fs / n),
                        measure_id: id,
                        value: r.value,
                        squared: r.squared,
                        normalization: r.normalization,
                        p_value,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = per_bin.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.frequency_bin, r.measure_id));
    Ok(rows)
}
