//! Flat `key = value` configuration with command-line overrides.
//!
//! Blank lines and lines starting with `#` are ignored. A later occurrence
//! of a key replaces an earlier one; overrides replace both.

use std::collections::BTreeMap;
use std::path::Path;

use lagcoh_core::simulation::{BlurringScenario, LaggedCouplingScenario, SourceKind, SourceSpec};
use lagcoh_core::{Centering, DegeneratePolicy, MeasureId, NormalizationKind, RMatrix};

use crate::dataset::Layout;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    /// value and source line (0 for overrides)
    entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::ConfigLine {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = k.trim();
            if key.is_empty() {
                return Err(CliError::ConfigLine {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            entries.insert(key.to_string(), (v.trim().to_string(), i + 1));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (value.into(), 0));
    }

    /// Applies `key=value` override strings.
    pub fn apply_overrides<'a>(&mut self, overrides: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{o}` is not key=value")))?;
            self.set(k.trim(), v.trim());
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn error(&self, key: &str, message: String) -> CliError {
        match self.entries.get(key) {
            Some(&(_, line)) if line > 0 => CliError::ConfigLine { line, message },
            _ => CliError::Config(message),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.error(key, format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.error(k, format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinSelection {
    /// `0..=N/2`, dropping bin 0 when per-segment centering makes it
    /// identically zero.
    All,
    /// Every DFT bin `0..N`.
    Full,
    List(Vec<usize>),
}

impl BinSelection {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "all" => return Some(BinSelection::All),
            "full" => return Some(BinSelection::Full),
            "" | "none" => return Some(BinSelection::List(Vec::new())),
            _ => {}
        }
        let mut bins = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if let Some((a, b)) = part.split_once('-') {
                let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                if a > b {
                    return None;
                }
                bins.extend(a..=b);
            } else {
                bins.push(part.parse().ok()?);
            }
        }
        bins.sort_unstable();
        bins.dedup();
        Some(BinSelection::List(bins))
    }

    pub fn resolve(&self, n_samples: usize, centering: Centering) -> Vec<usize> {
        match self {
            BinSelection::All => {
                let start = usize::from(centering.per_segment());
                (start..=n_samples / 2).collect()
            }
            BinSelection::Full => (0..n_samples).collect(),
            BinSelection::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureSelection {
    /// Every measure applicable to the channel counts.
    All,
    List(Vec<MeasureId>),
}

impl MeasureSelection {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        if s.trim() == "all" {
            return Ok(MeasureSelection::All);
        }
        let mut v = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let id: MeasureId = part.parse().map_err(|_| format!("unknown measure `{part}`"))?;
            if !v.contains(&id) {
                v.push(id);
            }
        }
        Ok(MeasureSelection::List(v))
    }

    pub fn resolve(&self, p: usize, q: usize) -> Vec<MeasureId> {
        let mut v = match self {
            MeasureSelection::All => MeasureId::ALL
                .into_iter()
                .filter(|m| !m.requires_univariate() || (p == 1 && q == 1))
                .collect(),
            MeasureSelection::List(v) => v.clone(),
        };
        v.sort();
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub measures: MeasureSelection,
    pub normalization: NormalizationKind,
    pub degenerate: DegeneratePolicy,
    pub bins: BinSelection,
    pub centering: Centering,
    pub n_permutations: Option<usize>,
    pub seed: Option<u64>,
    pub ridge: Option<f64>,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            measures: MeasureSelection::All,
            normalization: NormalizationKind::VariableWise,
            degenerate: DegeneratePolicy::Error,
            bins: BinSelection::All,
            centering: Centering::Both,
            n_permutations: None,
            seed: None,
            ridge: None,
            output_format: OutputFormat::Csv,
        }
    }
}

pub const RUN_KEYS: &[&str] = &[
    "measures",
    "normalization",
    "degenerate",
    "bins",
    "centering",
    "permutations",
    "seed",
    "ridge",
    "format",
];

pub fn parse_normalization(s: &str) -> Option<NormalizationKind> {
    match s {
        "vector" | "vector_wise" => Some(NormalizationKind::VectorWise),
        "variable" | "variable_wise" => Some(NormalizationKind::VariableWise),
        _ => None,
    }
}

pub fn parse_centering(s: &str) -> Option<Centering> {
    match s {
        "ensemble" => Some(Centering::Ensemble),
        "per_segment" => Some(Centering::PerSegment),
        "both" => Some(Centering::Both),
        "none" => Some(Centering::None),
        _ => None,
    }
}

pub fn parse_format(s: &str) -> Option<OutputFormat> {
    match s {
        "csv" => Some(OutputFormat::Csv),
        "json" => Some(OutputFormat::Json),
        _ => None,
    }
}

impl RunConfig {
    pub fn from_config(c: &Config) -> Result<Self> {
        c.check_keys(RUN_KEYS)?;
        let mut rc = RunConfig::default();
        let typed = |key: &str, value: Option<&str>, expect: &str| {
            c.error(key, format!("invalid value `{}` for `{key}`; expected {expect}", value.unwrap_or("")))
        };
        if let Some(v) = c.get("measures") {
            rc.measures = MeasureSelection::parse(v).map_err(|m| c.error("measures", m))?;
        }
        if let Some(v) = c.get("normalization") {
            rc.normalization = parse_normalization(v).ok_or_else(|| typed("normalization", Some(v), "vector or variable"))?;
        }
        if let Some(v) = c.get("degenerate") {
            rc.degenerate = match v {
                "error" => DegeneratePolicy::Error,
                "drop_segment" => DegeneratePolicy::DropSegment,
                _ => return Err(typed("degenerate", Some(v), "error or drop_segment")),
            };
        }
        if let Some(v) = c.get("bins") {
            rc.bins = BinSelection::parse(v).ok_or_else(|| typed("bins", Some(v), "all, full or a list like 1,4-8"))?;
        }
        if let Some(v) = c.get("centering") {
            rc.centering = parse_centering(v).ok_or_else(|| typed("centering", Some(v), "ensemble, per_segment, both or none"))?;
        }
        if let Some(v) = c.get("format") {
            rc.output_format = parse_format(v).ok_or_else(|| typed("format", Some(v), "csv or json"))?;
        }
        rc.n_permutations = c.parsed("permutations")?;
        rc.seed = c.parsed("seed")?;
        rc.ridge = c.parsed("ridge")?;
        if let Some(r) = rc.ridge {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(c.error("ridge", format!("ridge must be a non-negative number, got {r}")));
            }
        }
        Ok(rc)
    }
}

/// A simulation request read from a config document.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Blurring(BlurringScenario),
    Lagged(LaggedCouplingScenario),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    pub layout: Layout,
    pub sample_rate_hz: Option<f64>,
}

pub const SIM_KEYS: &[&str] = &[
    "scenario",
    "source",
    "source_bin",
    "damping",
    "amplitude",
    "mixing_c",
    "mixing_d",
    "noise_std_x",
    "noise_std_y",
    "noise_std",
    "lag",
    "gain",
    "n_segments",
    "n_samples",
    "seed",
    "sample_rate_hz",
    "layout",
];

/// Rows separated by `;`, entries by `,`: `1, 0.5; 0, 2` is 2x2.
pub fn parse_matrix(s: &str) -> Option<RMatrix> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|r| r.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>())
        .collect::<std::result::Result<_, _>>()
        .ok()?;
    let cols = rows.first()?.len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    Some(RMatrix::from_vec(rows.len(), cols, rows.concat()))
}

impl SimulationConfig {
    pub fn from_config(c: &Config) -> Result<Self> {
        c.check_keys(SIM_KEYS)?;
        let kind = match c.get("source").unwrap_or("sinusoid") {
            "sinusoid" | "sinusoid_with_jitter" => SourceKind::SinusoidWithJitter,
            "ar2" | "ar2_oscillator" => SourceKind::Ar2Oscillator,
            "white_noise" => SourceKind::WhiteNoise,
            other => return Err(c.error("source", format!("unknown source `{other}`"))),
        };
        let source = SourceSpec {
            kind,
            frequency_bin: c.parsed("source_bin")?,
            damping: c.parsed("damping")?,
            amplitude: c.parsed("amplitude")?.unwrap_or(1.0),
        };
        let n_segments = c.required("n_segments")?;
        let n_samples = c.required("n_samples")?;
        let seed = c.parsed("seed")?.unwrap_or(0);
        let matrix = |key: &str| -> Result<RMatrix> {
            match c.get(key) {
                None => Ok(RMatrix::from_vec(1, 1, vec![1.0])),
                Some(v) => parse_matrix(v).ok_or_else(|| c.error(key, format!("`{key}` is not a matrix like `1, 0; 0, 1`"))),
            }
        };
        let scenario = match c.get("scenario").unwrap_or("blurring") {
            "blurring" => Scenario::Blurring(BlurringScenario {
                mixing_c: matrix("mixing_c")?,
                mixing_d: matrix("mixing_d")?,
                source,
                noise_std_x: c.parsed("noise_std_x")?.unwrap_or(0.0),
                noise_std_y: c.parsed("noise_std_y")?.unwrap_or(0.0),
                n_segments,
                n_samples,
                seed,
            }),
            "lagged" => Scenario::Lagged(LaggedCouplingScenario {
                lag_samples: c.parsed("lag")?.unwrap_or(0),
                coupling_gain: c.parsed("gain")?.unwrap_or(1.0),
                source,
                noise_std: c.parsed("noise_std")?.unwrap_or(0.0),
                n_segments,
                n_samples,
                seed,
            }),
            other => return Err(c.error("scenario", format!("unknown scenario `{other}`; expected blurring or lagged"))),
        };
        let layout = match c.get("layout") {
            None => Layout::CsvLong,
            Some(v) => Layout::parse(v).ok_or_else(|| c.error("layout", format!("unknown layout `{v}`")))?,
        };
        Ok(Self {
            scenario,
            layout,
            sample_rate_hz: c.parsed("sample_rate_hz")?,
        })
    }
}
