//! Report rows and their CSV / JSON serialisation.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::config::OutputFormat;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report has no rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Coordinate {
    #[serde(rename = "wavelength_m")]
    Wavelength,
    #[serde(rename = "pressure_Pa")]
    Pressure,
    #[serde(rename = "position_m")]
    Position,
    #[serde(rename = "mass_kg")]
    Mass,
}

impl Coordinate {
    pub fn header(&self) -> &'static str {
        match self {
            Coordinate::Wavelength => "wavelength_m",
            Coordinate::Pressure => "pressure_Pa",
            Coordinate::Position => "position_m",
            Coordinate::Mass => "mass_kg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ReportRow {
    pub series: String,
    pub coordinate: f64,
    pub visibility_h1: Option<f64>,
    pub visibility_minmax: Option<f64>,
    pub mean_level: Option<f64>,
    pub signal: Option<f64>,
    #[serde(rename = "p0_Pa")]
    pub p0: Option<f64>,
    #[serde(rename = "sigma_eff_m2")]
    pub sigma_eff: Option<f64>,
    #[serde(rename = "reference_p0_Pa")]
    pub reference_p0: Option<f64>,
    #[serde(rename = "reference_sigma_eff_m2")]
    pub reference_sigma_eff: Option<f64>,
}

impl ReportRow {
    pub fn new(series: &str, coordinate: f64) -> Self {
        Self {
            series: series.to_string(),
            coordinate,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub coordinate: Coordinate,
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn series(&self, label: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.series == label).collect()
    }
}

const COLUMNS: [&str; 9] = [
    "visibility_h1",
    "visibility_minmax",
    "mean_level",
    "signal",
    "p0_Pa",
    "sigma_eff_m2",
    "reference_p0_Pa",
    "reference_sigma_eff_m2",
    "config_hash",
];

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: &'a ReportRow,
    config_hash: &'a str,
    seed: u64,
    code_version: &'a str,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: u32,
    scenario: &'a str,
    coordinate: Coordinate,
    config_hash: &'a str,
    seed: u64,
    code_version: &'a str,
    summary: &'a BTreeMap<String, serde_json::Value>,
    rows: Vec<JsonRow<'a>>,
}

/// Serialises a report. The CSV carries one header row; every data row
/// repeats the config hash, seed and code version.
pub fn emit_report(report: &Report, format: OutputFormat) -> Result<Vec<u8>, ReportError> {
    if report.rows.is_empty() {
        return Err(ReportError::Empty);
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["series", report.coordinate.header()];
            header.extend(COLUMNS);
            header.extend(["seed", "code_version"]);
            w.write_record(&header)?;
            let seed = report.seed.to_string();
            for r in &report.rows {
                w.write_record([
                    r.series.clone(),
                    float(r.coordinate),
                    opt(r.visibility_h1),
                    opt(r.visibility_minmax),
                    opt(r.mean_level),
                    opt(r.signal),
                    opt(r.p0),
                    opt(r.sigma_eff),
                    opt(r.reference_p0),
                    opt(r.reference_sigma_eff),
                    report.config_hash.clone(),
                    seed.clone(),
                    report.code_version.clone(),
                ])?;
            }
            w.into_inner().map_err(|e| ReportError::Io(e.into_error()))
        }
        OutputFormat::Json => {
            let doc = JsonReport {
                schema_version: report.schema_version,
                scenario: &report.scenario,
                coordinate: report.coordinate,
                config_hash: &report.config_hash,
                seed: report.seed,
                code_version: &report.code_version,
                summary: &report.summary,
                rows: report
                    .rows
                    .iter()
                    .map(|row| JsonRow {
                        row,
                        config_hash: &report.config_hash,
                        seed: report.seed,
                        code_version: &report.code_version,
                    })
                    .collect(),
            };
            let mut bytes = serde_json::to_vec_pretty(&doc)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}
