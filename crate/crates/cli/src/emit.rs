//! CSV and JSON emission. Floats use the shortest representation that
//! parses back to the same value, identically in both formats.

use serde::Serialize;

use crate::analysis::ResultRow;
use crate::config::OutputFormat;

pub const RESULT_COLUMNS: [&str; 7] = [
    "frequency_bin",
    "frequency_hz",
    "measure_id",
    "value",
    "squared",
    "normalization",
    "p_value",
];

pub fn format_f64(v: f64) -> String {
    serde_json::to_string(&v).expect("finite floats serialize")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

fn csv_line(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    csv_line(&mut out, &RESULT_COLUMNS.map(String::from));
    for r in rows {
        csv_line(
            &mut out,
            &[
                r.frequency_bin.to_string(),
                opt(r.frequency_hz),
                r.measure_id.to_string(),
                format_f64(r.value),
                r.squared.to_string(),
                r.normalization.map(|n| n.as_str().to_string()).unwrap_or_default(),
                opt(r.p_value),
            ],
        );
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize");
    s.push('\n');
    s
}

pub fn emit_results(rows: &[ResultRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => results_csv(rows),
        OutputFormat::Json => to_json(rows),
    }
}

/// One line of a `verify-parseval` report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsevalRow {
    pub frequency_bin: usize,
    pub edge_bin: bool,
    pub constant: f64,
    pub max_abs_rel_error: f64,
    pub negligible_power: bool,
    pub passed: bool,
}

pub fn emit_parseval(rows: &[ParsevalRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => to_json(rows),
        OutputFormat::Csv => {
            let mut out = String::from("frequency_bin,edge_bin,constant,max_abs_rel_error,negligible_power,passed\n");
            for r in rows {
                csv_line(
                    &mut out,
                    &[
                        r.frequency_bin.to_string(),
                        r.edge_bin.to_string(),
                        format_f64(r.constant),
                        format_f64(r.max_abs_rel_error),
                        r.negligible_power.to_string(),
                        r.passed.to_string(),
                    ],
                );
            }
            out
        }
    }
}
