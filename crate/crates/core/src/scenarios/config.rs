//! JSON scenario configs with unit-suffixed quantities.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::beamline::{CorrectionMode, DeflectionModel};
use crate::decoherence::DecoherenceModel;
use crate::talbot_lau::{SignalKind, VelocityDistribution};
use crate::units::{parse_quantity, Dimension, UnitError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("{path}: {source}")]
    Unit {
        path: String,
        #[source]
        source: UnitError,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

pub(crate) fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

pub(crate) fn quantity(path: &str, text: &str, dim: Dimension) -> Result<f64, ConfigError> {
    parse_quantity(text, dim).map_err(|source| ConfigError::Unit {
        path: path.to_string(),
        source,
    })
}

fn opt_quantity(path: &str, text: &Option<String>, dim: Dimension) -> Result<Option<f64>, ConfigError> {
    text.as_deref().map(|t| quantity(path, t, dim)).transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub molecule: Option<RawMolecule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<RawGeometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gas: Option<RawGasRef>,
    /// Gas temperature, default 300 K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoherence: Option<DecoherenceModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beamline: Option<RawBeamline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_scan: Option<RawWavelengthScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure_scan: Option<RawPressureScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fringe_scan: Option<RawFringeScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<RawTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMolecule {
    pub mass: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocityDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGeometry {
    pub separation: String,
    pub grating: RawGrating,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vibration_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrating {
    pub period: String,
    pub open_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawGasRef {
    Name(String),
    Inline(RawGas),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGas {
    pub name: String,
    pub mass: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c6: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarizability: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valence_electrons: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0_theory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0_experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0_experiment_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawBeamline {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oven_height: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oven_temperature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter_height: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter_position: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_waist: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_position: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_grating_position: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<CorrectionMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deflection: Option<DeflectionModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWavelengthScan {
    pub from: String,
    pub to: String,
    pub points: usize,
    pub series: Vec<RawSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSeries {
    pub label: String,
    #[serde(default = "quantum")]
    pub signal: SignalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure: Option<String>,
    #[serde(default)]
    pub corrected: bool,
}

fn quantum() -> SignalKind {
    SignalKind::Quantum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPressureScan {
    pub mean_speed: String,
    pub pressures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFringeScan {
    pub mean_speed: String,
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressures: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawTable {
    Gases {
        separation: String,
        mean_speed: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gases: Option<Vec<String>>,
    },
    Candidates {
        separation: String,
        mean_speed: String,
        candidates: Vec<RawCandidate>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCandidate {
    pub name: String,
    pub mass: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_eff: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarizability: Option<String>,
    pub valence_electrons: f64,
}

// ---------------------------------------------------------------------------
// normalised (SI) form

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub mass: f64,
    pub velocity: VelocityDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub separation: f64,
    pub period: f64,
    pub open_fraction: f64,
    pub thickness: f64,
    pub c3: f64,
    pub vibration_factor: f64,
    pub harmonics: usize,
    pub phase_cutoff: Option<f64>,
}

/// Gas entry before C6 resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct GasEntry {
    pub name: String,
    pub mass: f64,
    pub c6: Option<f64>,
    pub polarizability: Option<f64>,
    pub valence_electrons: Option<f64>,
    pub p0_theory: Option<f64>,
    pub p0_experiment: Option<f64>,
    pub p0_experiment_error: Option<f64>,
}

impl GasEntry {
    pub(crate) fn from_raw(path: &str, raw: &RawGas) -> Result<Self, ConfigError> {
        let entry = Self {
            name: raw.name.clone(),
            mass: quantity(&format!("{path}.mass"), &raw.mass, Dimension::Mass)?,
            c6: opt_quantity(&format!("{path}.c6"), &raw.c6, Dimension::EnergyVolume2)?,
            polarizability: opt_quantity(&format!("{path}.polarizability"), &raw.polarizability, Dimension::Volume)?,
            valence_electrons: raw.valence_electrons,
            p0_theory: opt_quantity(&format!("{path}.p0_theory"), &raw.p0_theory, Dimension::Pressure)?,
            p0_experiment: opt_quantity(&format!("{path}.p0_experiment"), &raw.p0_experiment, Dimension::Pressure)?,
            p0_experiment_error: opt_quantity(
                &format!("{path}.p0_experiment_error"),
                &raw.p0_experiment_error,
                Dimension::Pressure,
            )?,
        };
        if !(entry.mass > 0.0) {
            return Err(invalid(&format!("{path}.mass"), "must be positive"));
        }
        Ok(entry)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamlineSettings {
    pub oven_height: Option<f64>,
    pub oven_temperature: f64,
    pub delimiter_height: f64,
    pub delimiter_position: Option<f64>,
    pub detector_waist: Option<f64>,
    pub detector_position: Option<f64>,
    pub first_grating_position: Option<f64>,
    pub gravity: Option<f64>,
    pub samples: u64,
    pub bins: usize,
    pub batches: usize,
    pub mode: CorrectionMode,
    pub deflection: DeflectionModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub signal: SignalKind,
    pub open_fraction: Option<f64>,
    pub c3: Option<f64>,
    pub pressure: Option<f64>,
    pub corrected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub name: String,
    pub mass: f64,
    pub sigma_eff: Option<f64>,
    pub p0: Option<f64>,
    pub polarizability: Option<f64>,
    pub valence_electrons: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableScan {
    Gases {
        separation: f64,
        mean_speed: f64,
        gases: Option<Vec<String>>,
    },
    Candidates {
        separation: f64,
        mean_speed: f64,
        candidates: Vec<Candidate>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scan {
    Wavelength {
        from: f64,
        to: f64,
        points: usize,
        series: Vec<Series>,
    },
    Pressure {
        mean_speed: f64,
        pressures: Vec<f64>,
    },
    Fringe {
        mean_speed: f64,
        points: usize,
        pressures: Vec<f64>,
    },
    Table(TableScan),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GasRef {
    Named(String),
    Inline(GasEntry),
}

/// Validated scenario with SI values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: Option<String>,
    pub seed: u64,
    pub config_hash: String,
    pub molecule: Option<Molecule>,
    pub geometry: Option<Geometry>,
    pub gas: Option<GasRef>,
    pub temperature: f64,
    pub decoherence: DecoherenceModel,
    pub beamline: Option<BeamlineSettings>,
    pub scan: Scan,
    pub output: OutputFormat,
}

fn pressures(path: &str, list: &[String]) -> Result<Vec<f64>, ConfigError> {
    if list.is_empty() {
        return Err(invalid(path, "pressure list is empty"));
    }
    list.iter()
        .enumerate()
        .map(|(i, p)| {
            let path = format!("{path}[{i}]");
            let v = quantity(&path, p, Dimension::Pressure)?;
            if v < 0.0 {
                return Err(invalid(&path, "pressure must be >= 0"));
            }
            Ok(v)
        })
        .collect()
}

fn positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(path, format!("must be positive, got {v}")))
    }
}

/// Parses and validates a JSON scenario config.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Json {
        path: match e.path().to_string().as_str() {
            "." => "config".to_string(),
            p => p.to_string(),
        },
        message: e.inner().to_string(),
    })?;
    normalise(&raw)
}

/// Hex SHA-256 of the canonical serialisation of the parsed config.
pub fn config_hash(raw: &RawConfig) -> String {
    let bytes = serde_json::to_vec(raw).expect("config serialises");
    hex::encode(Sha256::digest(&bytes))[..16].to_string()
}

pub fn normalise(raw: &RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let scans = [
        raw.wavelength_scan.is_some(),
        raw.pressure_scan.is_some(),
        raw.fringe_scan.is_some(),
        raw.table.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if scans != 1 {
        return Err(invalid(
            "config",
            format!(
                "exactly one of wavelength_scan, pressure_scan, fringe_scan, table is required, found {scans}"
            ),
        ));
    }

    let molecule = raw
        .molecule
        .as_ref()
        .map(|m| -> Result<Molecule, ConfigError> {
            let mass = positive("molecule.mass", quantity("molecule.mass", &m.mass, Dimension::Mass)?)?;
            let velocity = m.velocity.clone().unwrap_or(VelocityDistribution::Monochromatic);
            velocity
                .validate()
                .map_err(|e| invalid("molecule.velocity", e.to_string()))?;
            Ok(Molecule { mass, velocity })
        })
        .transpose()?;

    let geometry = raw
        .geometry
        .as_ref()
        .map(|g| -> Result<Geometry, ConfigError> {
            let separation = positive(
                "geometry.separation",
                quantity("geometry.separation", &g.separation, Dimension::Length)?,
            )?;
            let period = positive(
                "geometry.grating.period",
                quantity("geometry.grating.period", &g.grating.period, Dimension::Length)?,
            )?;
            let f = g.grating.open_fraction;
            if !(f > 0.0 && f < 1.0) {
                return Err(invalid("geometry.grating.open_fraction", format!("must lie in (0, 1), got {f}")));
            }
            let thickness = opt_quantity("geometry.grating.thickness", &g.grating.thickness, Dimension::Length)?
                .unwrap_or(0.0);
            let c3 = opt_quantity("geometry.grating.c3", &g.grating.c3, Dimension::EnergyVolume)?.unwrap_or(0.0);
            if thickness < 0.0 || c3 < 0.0 {
                return Err(invalid("geometry.grating", "thickness and c3 must be >= 0"));
            }
            Ok(Geometry {
                separation,
                period,
                open_fraction: f,
                thickness,
                c3,
                vibration_factor: g.vibration_factor.unwrap_or(1.0),
                harmonics: g.harmonics.unwrap_or(20),
                phase_cutoff: g.phase_cutoff,
            })
        })
        .transpose()?;

    let gas = match &raw.gas {
        None => None,
        Some(RawGasRef::Name(n)) => Some(GasRef::Named(n.clone())),
        Some(RawGasRef::Inline(g)) => Some(GasRef::Inline(GasEntry::from_raw("gas", g)?)),
    };
    let temperature = positive(
        "temperature",
        opt_quantity("temperature", &raw.temperature, Dimension::Temperature)?.unwrap_or(300.0),
    )?;

    let beamline = raw
        .beamline
        .as_ref()
        .map(|b| -> Result<BeamlineSettings, ConfigError> {
            let q = |name: &str, v: &Option<String>, d| opt_quantity(&format!("beamline.{name}"), v, d);
            Ok(BeamlineSettings {
                oven_height: q("oven_height", &b.oven_height, Dimension::Length)?,
                oven_temperature: q("oven_temperature", &b.oven_temperature, Dimension::Temperature)?
                    .unwrap_or(900.0),
                delimiter_height: q("delimiter_height", &b.delimiter_height, Dimension::Length)?.unwrap_or(50e-6),
                delimiter_position: q("delimiter_position", &b.delimiter_position, Dimension::Length)?,
                detector_waist: q("detector_waist", &b.detector_waist, Dimension::Length)?,
                detector_position: q("detector_position", &b.detector_position, Dimension::Length)?,
                first_grating_position: q("first_grating_position", &b.first_grating_position, Dimension::Length)?,
                gravity: b.gravity,
                samples: b.samples.unwrap_or(100_000),
                bins: b.bins.unwrap_or(60),
                batches: b.batches.unwrap_or(20),
                mode: b.mode.unwrap_or_default(),
                deflection: b.deflection.unwrap_or_default(),
            })
        })
        .transpose()?;

    let need = |what: bool, path: &str, name: &str| -> Result<(), ConfigError> {
        if what {
            Ok(())
        } else {
            Err(invalid(path, format!("this scan requires a {name} block")))
        }
    };

    let scan = if let Some(w) = &raw.wavelength_scan {
        need(molecule.is_some(), "wavelength_scan", "molecule")?;
        need(geometry.is_some(), "wavelength_scan", "geometry")?;
        let from = positive("wavelength_scan.from", quantity("wavelength_scan.from", &w.from, Dimension::Length)?)?;
        let to = positive("wavelength_scan.to", quantity("wavelength_scan.to", &w.to, Dimension::Length)?)?;
        if w.points < 1 || (w.points > 1 && !(to > from)) {
            return Err(invalid("wavelength_scan", "need points >= 1 and to > from"));
        }
        if w.series.is_empty() {
            return Err(invalid("wavelength_scan.series", "at least one series is required"));
        }
        let mut series = Vec::new();
        for (i, s) in w.series.iter().enumerate() {
            let path = format!("wavelength_scan.series[{i}]");
            if let Some(f) = s.open_fraction {
                if !(f > 0.0 && f < 1.0) {
                    return Err(invalid(&format!("{path}.open_fraction"), "must lie in (0, 1)"));
                }
            }
            let pressure = opt_quantity(&format!("{path}.pressure"), &s.pressure, Dimension::Pressure)?;
            if pressure.is_some_and(|p| p < 0.0) {
                return Err(invalid(&format!("{path}.pressure"), "must be >= 0"));
            }
            if (pressure.is_some() || s.corrected) && s.signal == SignalKind::Classical {
                return Err(invalid(&path, "pressure and beamline correction apply to quantum series only"));
            }
            if pressure.is_some() || s.corrected {
                need(gas.is_some(), &path, "gas")?;
            }
            if s.corrected {
                need(beamline.is_some(), &path, "beamline")?;
            }
            series.push(Series {
                label: s.label.clone(),
                signal: s.signal,
                open_fraction: s.open_fraction,
                c3: opt_quantity(&format!("{path}.c3"), &s.c3, Dimension::EnergyVolume)?,
                pressure,
                corrected: s.corrected,
            });
        }
        Scan::Wavelength {
            from,
            to,
            points: w.points,
            series,
        }
    } else if let Some(p) = &raw.pressure_scan {
        need(molecule.is_some(), "pressure_scan", "molecule")?;
        need(geometry.is_some(), "pressure_scan", "geometry")?;
        need(gas.is_some(), "pressure_scan", "gas")?;
        Scan::Pressure {
            mean_speed: positive(
                "pressure_scan.mean_speed",
                quantity("pressure_scan.mean_speed", &p.mean_speed, Dimension::Speed)?,
            )?,
            pressures: pressures("pressure_scan.pressures", &p.pressures)?,
        }
    } else if let Some(f) = &raw.fringe_scan {
        need(molecule.is_some(), "fringe_scan", "molecule")?;
        need(geometry.is_some(), "fringe_scan", "geometry")?;
        let ps = match &f.pressures {
            Some(list) => {
                need(gas.is_some(), "fringe_scan", "gas")?;
                pressures("fringe_scan.pressures", list)?
            }
            None => vec![0.0],
        };
        if f.points < 2 {
            return Err(invalid("fringe_scan.points", "need at least 2 points"));
        }
        Scan::Fringe {
            mean_speed: positive(
                "fringe_scan.mean_speed",
                quantity("fringe_scan.mean_speed", &f.mean_speed, Dimension::Speed)?,
            )?,
            points: f.points,
            pressures: ps,
        }
    } else {
        match raw.table.as_ref().expect("one scan present") {
            RawTable::Gases {
                separation,
                mean_speed,
                gases,
            } => Scan::Table(TableScan::Gases {
                separation: positive("table.separation", quantity("table.separation", separation, Dimension::Length)?)?,
                mean_speed: positive("table.mean_speed", quantity("table.mean_speed", mean_speed, Dimension::Speed)?)?,
                gases: gases.clone(),
            }),
            RawTable::Candidates {
                separation,
                mean_speed,
                candidates,
            } => {
                need(gas.is_some(), "table", "gas")?;
                if candidates.is_empty() {
                    return Err(invalid("table.candidates", "at least one candidate is required"));
                }
                let list = candidates
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let path = format!("table.candidates[{i}]");
                        Ok(Candidate {
                            name: c.name.clone(),
                            mass: positive(
                                &format!("{path}.mass"),
                                quantity(&format!("{path}.mass"), &c.mass, Dimension::Mass)?,
                            )?,
                            sigma_eff: opt_quantity(&format!("{path}.sigma_eff"), &c.sigma_eff, Dimension::Area)?,
                            p0: opt_quantity(&format!("{path}.p0"), &c.p0, Dimension::Pressure)?,
                            polarizability: opt_quantity(
                                &format!("{path}.polarizability"),
                                &c.polarizability,
                                Dimension::Volume,
                            )?,
                            valence_electrons: positive(&format!("{path}.valence_electrons"), c.valence_electrons)?,
                        })
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                Scan::Table(TableScan::Candidates {
                    separation: positive("table.separation", quantity("table.separation", separation, Dimension::Length)?)?,
                    mean_speed: positive("table.mean_speed", quantity("table.mean_speed", mean_speed, Dimension::Speed)?)?,
                    candidates: list,
                })
            }
        }
    };

    Ok(ScenarioConfig {
        name: raw.name.clone(),
        description: raw.description.clone(),
        seed: raw.seed.unwrap_or(0),
        config_hash: config_hash(raw),
        molecule,
        geometry,
        gas,
        temperature,
        decoherence: raw.decoherence.unwrap_or_default(),
        beamline,
        scan,
        output: raw.output.unwrap_or_default(),
    })
}
