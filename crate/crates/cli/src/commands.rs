//! Subcommand bodies. Each returns the bytes to emit; the binary decides
//! where they go.

use std::path::{Path, PathBuf};

use lagcoh_core::simulation::{generate_blurring, generate_lagged};
use lagcoh_core::zerolag::{verify_parseval_identity, ParsevalOptions};
use lagcoh_core::{Centering, SegmentedSeries};

use crate::analysis::run_analysis;
use crate::config::{parse_format, BinSelection, Config, OutputFormat, RunConfig, Scenario, SimulationConfig};
use crate::dataset::{load_dataset, read_header, save_dataset, sidecar_path, DatasetHeader};
use crate::emit::{emit_parseval, emit_results, ParsevalRow};
use crate::error::{CliError, Result};

/// Permutation count used by `test` when none is given.
pub const DEFAULT_TEST_PERMUTATIONS: usize = 199;

pub fn load_input(input: &Path, header: Option<&Path>) -> Result<(SegmentedSeries, SegmentedSeries)> {
    let header_path = header.map(Path::to_path_buf).unwrap_or_else(|| sidecar_path(input));
    let h = read_header(&header_path)?;
    load_dataset(input, &h)
}

pub fn analyze(config: &Config, input: &Path, header: Option<&Path>) -> Result<String> {
    let rc = RunConfig::from_config(config)?;
    let (x, y) = load_input(input, header)?;
    let rows = run_analysis(&rc, &x, &y)?;
    Ok(emit_results(&rows, rc.output_format))
}

pub fn permutation(config: &Config, input: &Path, header: Option<&Path>) -> Result<String> {
    let mut rc = RunConfig::from_config(config)?;
    rc.n_permutations.get_or_insert(DEFAULT_TEST_PERMUTATIONS);
    let (x, y) = load_input(input, header)?;
    let rows = run_analysis(&rc, &x, &y)?;
    Ok(emit_results(&rows, rc.output_format))
}

/// Generates the configured scenario and writes it to `output` plus its
/// header sidecar. Returns the header path.
pub fn simulate(config: &Config, output: &Path) -> Result<PathBuf> {
    let sc = SimulationConfig::from_config(config)?;
    let (mut x, mut y) = match &sc.scenario {
        Scenario::Blurring(s) => generate_blurring(s)?,
        Scenario::Lagged(s) => generate_lagged(s)?,
    };
    if let Some(hz) = sc.sample_rate_hz {
        x = x.with_sample_rate(hz)?;
        y = y.with_sample_rate(hz)?;
    }
    let header = DatasetHeader::for_series(&x, &y, sc.layout);
    save_dataset(output, &header, &x, &y)?;
    Ok(sidecar_path(output))
}

pub struct ParsevalRequest {
    pub bins: BinSelection,
    pub centered: bool,
    pub include_edge_bins: bool,
    pub format: OutputFormat,
}

/// Checks the zero-lag identity on the stacked `(Y; X)` series. Returns the
/// report and whether every bin passed.
pub fn verify_parseval(req: &ParsevalRequest, input: &Path, header: Option<&Path>) -> Result<(String, bool)> {
    let (x, y) = load_input(input, header)?;
    let z = SegmentedSeries::stack(&y, &x)?;
    let n = z.n_samples();
    let bins: Vec<usize> = match &req.bins {
        BinSelection::All => (0..=n / 2)
            .filter(|&b| req.include_edge_bins || (b != 0 && !(n % 2 == 0 && b == n / 2)))
            .collect(),
        other => other.resolve(n, Centering::None),
    };
    let options = ParsevalOptions {
        spectral_centered: req.centered,
        filter_centered: req.centered,
        include_edge_bins: req.include_edge_bins,
    };
    let mut rows = Vec::with_capacity(bins.len());
    for bin in bins {
        let rep = verify_parseval_identity(&z, bin, options)?;
        rows.push(ParsevalRow {
            frequency_bin: bin,
            edge_bin: rep.edge_bin,
            constant: rep.constant,
            max_abs_rel_error: rep.max_abs_rel_error,
            negligible_power: rep.negligible_power,
            passed: rep.passed,
        });
    }
    let ok = rows.iter().all(|r| r.passed);
    Ok((emit_parseval(&rows, req.format), ok))
}

pub fn format_or_default(s: Option<&str>) -> Result<OutputFormat> {
    match s {
        None => Ok(OutputFormat::Csv),
        Some(v) => parse_format(v).ok_or_else(|| CliError::Config(format!("unknown format `{v}`; expected csv or json"))),
    }
}
