//! Dataset files: a JSON header sidecar plus a payload in one of two
//! layouts.
//!
//! * `csv_long`: header row `segment,t,channel_role,channel_index,value`,
//!   one sample per row, `channel_role` is `x` or `y`. Rows may come in any
//!   order but every cell must appear exactly once.
//! * `binary_f64le`: little-endian f64, row-major `(segment, time, channel)`,
//!   the whole X block followed by the whole Y block.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lagcoh_core::SegmentedSeries;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    CsvLong,
    BinaryF64le,
}

impl Layout {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv_long" | "csv" => Some(Layout::CsvLong),
            "binary_f64le" | "binary" => Some(Layout::BinaryF64le),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelNames {
    #[serde(default)]
    pub x: Vec<String>,
    #[serde(default)]
    pub y: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub n_segments: usize,
    pub n_samples: usize,
    pub n_channels_x: usize,
    pub n_channels_y: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_hz: Option<f64>,
    pub layout: Layout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_names: Option<ChannelNames>,
}

impl DatasetHeader {
    pub fn for_series(x: &SegmentedSeries, y: &SegmentedSeries, layout: Layout) -> Self {
        Self {
            n_segments: x.n_segments(),
            n_samples: x.n_samples(),
            n_channels_x: x.n_channels(),
            n_channels_y: y.n_channels(),
            sample_rate_hz: x.sample_rate_hz(),
            layout,
            channel_names: None,
        }
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let bad = |message: String| CliError::Header {
            path: path.to_path_buf(),
            message,
        };
        for (name, v) in [
            ("n_segments", self.n_segments),
            ("n_samples", self.n_samples),
            ("n_channels_x", self.n_channels_x),
            ("n_channels_y", self.n_channels_y),
        ] {
            if v == 0 {
                return Err(bad(format!("{name} must be positive")));
            }
        }
        if let Some(hz) = self.sample_rate_hz {
            if !(hz > 0.0 && hz.is_finite()) {
                return Err(bad(format!("sample_rate_hz must be positive, got {hz}")));
            }
        }
        if let Some(names) = &self.channel_names {
            if !names.x.is_empty() && names.x.len() != self.n_channels_x {
                return Err(bad(format!("{} x channel names for {} channels", names.x.len(), self.n_channels_x)));
            }
            if !names.y.is_empty() && names.y.len() != self.n_channels_y {
                return Err(bad(format!("{} y channel names for {} channels", names.y.len(), self.n_channels_y)));
            }
        }
        Ok(())
    }

    fn values_x(&self) -> usize {
        self.n_segments * self.n_samples * self.n_channels_x
    }

    fn values_y(&self) -> usize {
        self.n_segments * self.n_samples * self.n_channels_y
    }
}

/// Default sidecar location: the payload path with `.json` appended.
pub fn sidecar_path(payload: &Path) -> PathBuf {
    let mut s = payload.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn read_header(path: &Path) -> Result<DatasetHeader> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let header: DatasetHeader = serde_json::from_str(&text).map_err(|e| CliError::Header {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    header.validate(path)?;
    Ok(header)
}

pub fn load_dataset(path: &Path, header: &DatasetHeader) -> Result<(SegmentedSeries, SegmentedSeries)> {
    header.validate(path)?;
    let (xs, ys) = match header.layout {
        Layout::CsvLong => read_csv_long(path, header)?,
        Layout::BinaryF64le => read_binary(path, header)?,
    };
    let mut x = SegmentedSeries::new(xs, header.n_segments, header.n_samples, header.n_channels_x)?;
    let mut y = SegmentedSeries::new(ys, header.n_segments, header.n_samples, header.n_channels_y)?;
    if let Some(hz) = header.sample_rate_hz {
        x = x.with_sample_rate(hz)?;
        y = y.with_sample_rate(hz)?;
    }
    Ok((x, y))
}

fn read_binary(path: &Path, h: &DatasetHeader) -> Result<(Vec<f64>, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let expected = 8 * (h.values_x() + h.values_y());
    if bytes.len() != expected {
        return Err(CliError::Binary {
            path: path.to_path_buf(),
            offset: bytes.len().min(expected) as u64,
            message: format!("expected {expected} bytes from the header, found {}", bytes.len()),
        });
    }
    let mut values = Vec::with_capacity(expected / 8);
    for (i, chunk) in bytes.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("chunk of 8"));
        if !v.is_finite() {
            return Err(CliError::Binary {
                path: path.to_path_buf(),
                offset: 8 * i as u64,
                message: format!("non-finite value {v}"),
            });
        }
        values.push(v);
    }
    let ys = values.split_off(h.values_x());
    Ok((values, ys))
}

fn read_csv_long(path: &Path, h: &DatasetHeader) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let want = ["segment", "t", "channel_role", "channel_index", "value"];
    if headers.iter().collect::<Vec<_>>() != want {
        return Err(CliError::Csv {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected columns {}, found {}", want.join(","), headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut xs: Vec<Option<f64>> = vec![None; h.values_x()];
    let mut ys: Vec<Option<f64>> = vec![None; h.values_y()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let fail = |message: String| CliError::Csv {
            path: path.to_path_buf(),
            line,
            message,
        };
        let index = |col: usize, name: &str| -> Result<usize> {
            record[col]
                .parse::<usize>()
                .map_err(|_| fail(format!("{name} `{}` is not a non-negative integer", &record[col])))
        };
        let segment = index(0, "segment")?;
        let t = index(1, "t")?;
        let channel = index(3, "channel_index")?;
        let value: f64 = record[4]
            .parse()
            .map_err(|_| fail(format!("value `{}` is not a number", &record[4])))?;
        if !value.is_finite() {
            return Err(fail(format!("non-finite value `{}`", &record[4])));
        }
        let (target, n_ch) = match &record[2] {
            "x" => (&mut xs, h.n_channels_x),
            "y" => (&mut ys, h.n_channels_y),
            other => return Err(fail(format!("channel_role must be x or y, found `{other}`"))),
        };
        if segment >= h.n_segments || t >= h.n_samples || channel >= n_ch {
            return Err(fail(format!(
                "index (segment {segment}, t {t}, channel {channel}) outside the header's {} x {} x {n_ch}",
                h.n_segments, h.n_samples
            )));
        }
        let slot = &mut target[(segment * h.n_samples + t) * n_ch + channel];
        if slot.is_some() {
            return Err(fail(format!("duplicate sample (segment {segment}, t {t}, {} channel {channel})", &record[2])));
        }
        *slot = Some(value);
    }
    let missing = xs.iter().filter(|v| v.is_none()).count() + ys.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(CliError::Csv {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "expected {} samples from the header, found {}",
                h.values_x() + h.values_y(),
                h.values_x() + h.values_y() - missing
            ),
        });
    }
    Ok((xs.into_iter().flatten().collect(), ys.into_iter().flatten().collect()))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    CliError::Csv {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Writes the payload to `path` and the header to its sidecar.
pub fn save_dataset(path: &Path, header: &DatasetHeader, x: &SegmentedSeries, y: &SegmentedSeries) -> Result<()> {
    let bytes = match header.layout {
        Layout::BinaryF64le => {
            let mut out = Vec::with_capacity(8 * (x.as_slice().len() + y.as_slice().len()));
            for v in x.as_slice().iter().chain(y.as_slice()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out
        }
        Layout::CsvLong => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["segment", "t", "channel_role", "channel_index", "value"])
                .map_err(|e| csv_error(path, e))?;
            for (role, s) in [("x", x), ("y", y)] {
                for j in 0..s.n_segments() {
                    for t in 0..s.n_samples() {
                        for c in 0..s.n_channels() {
                            let (js, ts, cs) = (j.to_string(), t.to_string(), c.to_string());
                            let v = crate::emit::format_f64(s.value(j, t, c));
                            w.write_record([js.as_str(), ts.as_str(), role, cs.as_str(), v.as_str()])
                                .map_err(|e| csv_error(path, e))?;
                        }
                    }
                }
            }
            w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?
        }
    };
    write_file(path, &bytes)?;
    let mut json = serde_json::to_string_pretty(header).expect("header serializes");
    json.push('\n');
    write_file(&sidecar_path(path), json.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}
