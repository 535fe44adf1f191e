//! Declarative scenarios: config parsing, dispatch to the physics modules
//! and report emission.

pub mod builtin;
pub mod config;
pub mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::beamline::{corrected_visibility, BeamlineSpec, MonteCarloOptions, SourceDistribution};
use crate::constants::ANGSTROM3;
use crate::decoherence::{
    decohered_signal, p0_from_sigma_eff, polarizability_from_mass, sigma_eff, sigma_eff_from_p0,
    slater_kirkwood_c6, visibility_vs_pressure, GasSpec,
};
use crate::grating::{GratingOptions, GratingSpec};
use crate::talbot_lau::{linear_grid, visibility, Interferometer, SignalKind};

pub use builtin::{scenario_text, C6Source, GasDatabase, SCENARIOS};
pub use config::{parse_config, ConfigError, OutputFormat, Scan, ScenarioConfig, TableScan};
pub use report::{emit_report, Coordinate, Report, ReportError, ReportRow, SCHEMA_VERSION};

use config::{BeamlineSettings, GasRef, Geometry, Molecule, Series};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario {scenario}: {context}: {message}")]
    Physics {
        scenario: String,
        context: String,
        message: String,
    },
    #[error("unknown built-in scenario {0:?}")]
    UnknownScenario(String),
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    db: GasDatabase,
}

impl Ctx<'_> {
    fn fail(&self, context: impl Into<String>, e: impl std::fmt::Display) -> ScenarioError {
        ScenarioError::Physics {
            scenario: self.cfg.name.clone(),
            context: context.into(),
            message: e.to_string(),
        }
    }

    fn molecule(&self) -> &Molecule {
        self.cfg.molecule.as_ref().expect("validated")
    }

    fn interferometer(&self, open_fraction: Option<f64>, c3: Option<f64>) -> Result<Interferometer, ScenarioError> {
        let g: &Geometry = self.cfg.geometry.as_ref().expect("validated");
        let spec = GratingSpec::new(
            g.period,
            open_fraction.unwrap_or(g.open_fraction),
            g.thickness,
            c3.unwrap_or(g.c3),
        )
        .map_err(|e| self.fail("grating", e))?;
        let mut interf = Interferometer::new(g.separation, spec, self.molecule().mass);
        interf.vibration_factor = g.vibration_factor;
        interf.m_max = g.harmonics;
        if let Some(phi) = g.phase_cutoff {
            interf.options = GratingOptions {
                phi_max: phi,
                ..GratingOptions::default()
            };
        }
        interf.validate().map_err(|e| self.fail("interferometer", e))?;
        Ok(interf)
    }

    fn gas(&self) -> Result<(GasSpec, C6Source), ScenarioError> {
        let entry = match self.cfg.gas.as_ref().expect("validated") {
            GasRef::Named(n) => self
                .db
                .find(n)
                .cloned()
                .ok_or_else(|| ConfigError::Invalid {
                    path: "gas".into(),
                    message: format!("unknown gas {n:?}; see `tlsim list-gases`"),
                })?,
            GasRef::Inline(e) => e.clone(),
        };
        Ok(self.db.resolve(&entry, self.cfg.temperature)?)
    }

    fn beamline(&self, b: &BeamlineSettings, speed: f64) -> Result<BeamlineSpec, ScenarioError> {
        let g = self.cfg.geometry.as_ref().expect("validated");
        let mut spec = BeamlineSpec::for_selected_speed(speed, g.separation, b.delimiter_height);
        if let Some(v) = b.oven_height {
            spec.oven_height = v;
        }
        if let Some(v) = b.delimiter_position {
            spec.delimiter_position = v;
        }
        if let Some(v) = b.detector_waist {
            spec.detector_waist = v;
        }
        if let Some(v) = b.detector_position {
            spec.detector_position = v;
        }
        if let Some(v) = b.first_grating_position {
            spec.first_grating_position = v;
        }
        if let Some(v) = b.gravity {
            spec.gravity = v;
        }
        spec.oven_offset = spec.offset_for_speed(speed);
        spec.validate().map_err(|e| self.fail("beamline", e))?;
        Ok(spec)
    }

    fn mc_options(&self, b: &BeamlineSettings) -> MonteCarloOptions {
        MonteCarloOptions {
            samples: b.samples,
            bins: b.bins,
            batches: b.batches,
            seed: self.cfg.seed,
            mode: b.mode,
            deflection: b.deflection,
            cross_section: self.cfg.decoherence.cross_section,
        }
    }
}

/// Parses and runs a built-in scenario.
pub fn run_builtin(name: &str, seed: Option<u64>) -> Result<Report, ScenarioError> {
    let text = scenario_text(name).ok_or_else(|| ScenarioError::UnknownScenario(name.to_string()))?;
    let mut cfg = parse_config(text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    run_scenario(&cfg)
}

/// Runs a validated scenario. The output depends only on the config, the
/// seed and the code version.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Report, ScenarioError> {
    let ctx = Ctx {
        cfg,
        db: GasDatabase::builtin(),
    };
    let mut summary = BTreeMap::new();
    if let Some(d) = &cfg.description {
        summary.insert("description".to_string(), json!(d));
    }
    let (coordinate, rows) = match &cfg.scan {
        Scan::Wavelength {
            from,
            to,
            points,
            series,
        } => (
            Coordinate::Wavelength,
            run_wavelength(&ctx, &linear_grid(*from, *to, *points), series, &mut summary)?,
        ),
        Scan::Pressure { mean_speed, pressures } => {
            (Coordinate::Pressure, run_pressure(&ctx, *mean_speed, pressures, &mut summary)?)
        }
        Scan::Fringe {
            mean_speed,
            points,
            pressures,
        } => (
            Coordinate::Position,
            run_fringe(&ctx, *mean_speed, *points, pressures, &mut summary)?,
        ),
        Scan::Table(t) => (Coordinate::Mass, run_table(&ctx, t, &mut summary)?),
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.name.clone(),
        coordinate,
        config_hash: cfg.config_hash.clone(),
        seed: cfg.seed,
        code_version: CODE_VERSION.to_string(),
        summary,
        rows,
    })
}

/// Interior grid points that exceed both neighbours.
pub fn local_maxima(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .map(|i| xs[i])
        .collect()
}

fn run_wavelength(
    ctx: &Ctx,
    grid: &[f64],
    series: &[Series],
    summary: &mut BTreeMap<String, Value>,
) -> Result<Vec<ReportRow>, ScenarioError> {
    let dist = &ctx.molecule().velocity;
    let mut rows = Vec::new();
    let gas = if series.iter().any(|s| s.pressure.is_some() || s.corrected) {
        let (g, src) = ctx.gas()?;
        summary.insert("gas".into(), json!({"name": g.name, "c6_J_m6": g.c6, "c6_source": src.as_str()}));
        Some(g)
    } else {
        None
    };
    let model = ctx.cfg.decoherence;

    // corrected series sharing a grating are evaluated together
    let mut corrected: Vec<(Option<f64>, Option<f64>, Vec<&Series>)> = Vec::new();
    for s in series.iter().filter(|s| s.corrected) {
        match corrected.iter_mut().find(|(f, c, _)| *f == s.open_fraction && *c == s.c3) {
            Some(group) => group.2.push(s),
            None => corrected.push((s.open_fraction, s.c3, vec![s])),
        }
    }
    let mut corrected_rows: BTreeMap<String, Vec<ReportRow>> = BTreeMap::new();
    for (f, c3, members) in &corrected {
        let interf = ctx.interferometer(*f, *c3)?;
        let settings = ctx.cfg.beamline.as_ref().expect("validated");
        let gas = gas.as_ref().expect("validated");
        let pressures: Vec<f64> = members.iter().map(|s| s.pressure.unwrap_or(0.0)).collect();
        let source = SourceDistribution::Effusive {
            temperature: settings.oven_temperature,
            molecule_mass: interf.molecule_mass,
        };
        let opts = ctx.mc_options(settings);
        let per_lambda = grid
            .iter()
            .map(|&lambda| {
                let v = interf.speed(lambda);
                let spec = ctx.beamline(settings, v)?;
                corrected_visibility(&spec, &source, &interf, gas, &pressures, &opts)
                    .map_err(|e| ctx.fail(format!("beamline at {lambda:e} m"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (k, s) in members.iter().enumerate() {
            let list = per_lambda
                .iter()
                .zip(grid)
                .map(|(curve, &lambda)| {
                    let p = &curve.points[k];
                    let mut row = ReportRow::new(&s.label, lambda);
                    row.visibility_h1 = Some(p.corrected);
                    row.p0 = Some(curve.p0);
                    row
                })
                .collect();
            corrected_rows.insert(s.label.clone(), list);
        }
    }

    for s in series {
        let list = if s.corrected {
            corrected_rows.remove(&s.label).unwrap_or_default()
        } else {
            let interf = ctx.interferometer(s.open_fraction, s.c3)?;
            grid.par_iter()
                .map(|&lambda| {
                    let v = interf.speed(lambda);
                    let mut row = ReportRow::new(&s.label, lambda);
                    match s.pressure {
                        None => {
                            let sig = interf
                                .averaged_signal(v, dist, s.signal)
                                .map_err(|e| ctx.fail(format!("{} at {lambda:e} m", s.label), e))?;
                            let vis = visibility(&sig).map_err(|e| ctx.fail(&s.label, e))?;
                            row.visibility_h1 = Some(vis.first_harmonic);
                            row.visibility_minmax = Some(vis.minmax);
                            row.mean_level = Some(vis.mean);
                        }
                        Some(p) => {
                            let gas = gas.as_ref().expect("validated");
                            let r = visibility_vs_pressure(&interf, dist, v, gas, &model, &[p])
                                .map_err(|e| ctx.fail(format!("{} at {lambda:e} m", s.label), e))?;
                            let vis = r.curve[0].visibility;
                            row.visibility_h1 = Some(vis.first_harmonic);
                            row.visibility_minmax = Some(vis.minmax);
                            row.mean_level = Some(vis.mean);
                            row.p0 = Some(r.p0);
                            row.sigma_eff = Some(r.sigma_eff);
                        }
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?
        };
        let ys: Vec<f64> = list.iter().map(|r| r.visibility_h1.unwrap_or(0.0)).collect();
        summary.insert(format!("{}.maxima_m", s.label), json!(local_maxima(grid, &ys)));
        rows.extend(list);
    }
    Ok(rows)
}

/// Least-squares slope and largest residual of `ln V` against `p`.
pub fn log_linear_fit(ps: &[f64], vs: &[f64]) -> (f64, f64, f64) {
    let n = ps.len() as f64;
    let ys: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let mx = ps.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = ps.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = ps.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let resid = ps
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    (slope, intercept, resid)
}

fn run_pressure(
    ctx: &Ctx,
    mean_speed: f64,
    pressures: &[f64],
    summary: &mut BTreeMap<String, Value>,
) -> Result<Vec<ReportRow>, ScenarioError> {
    let interf = ctx.interferometer(None, None)?;
    let (gas, src) = ctx.gas()?;
    let model = ctx.cfg.decoherence;
    let r = visibility_vs_pressure(&interf, &ctx.molecule().velocity, mean_speed, &gas, &model, pressures)
        .map_err(|e| ctx.fail("pressure scan", e))?;
    let mut rows = Vec::new();
    for pt in &r.curve {
        let mut row = ReportRow::new("averaged", pt.pressure);
        row.visibility_h1 = Some(pt.visibility.first_harmonic);
        row.visibility_minmax = Some(pt.visibility.minmax);
        row.mean_level = Some(pt.visibility.mean);
        row.p0 = Some(r.p0);
        row.sigma_eff = Some(r.sigma_eff);
        rows.push(row);
    }
    for pt in &r.curve {
        let mut row = ReportRow::new("exponential_law", pt.pressure);
        row.visibility_h1 = Some(pt.exponential_law);
        row.p0 = Some(r.p0);
        row.sigma_eff = Some(r.sigma_eff);
        rows.push(row);
    }
    let vs: Vec<f64> = r.curve.iter().map(|p| p.visibility.first_harmonic).collect();
    if vs.iter().all(|&v| v > 0.0) && pressures.len() >= 2 {
        let (slope, _, resid) = log_linear_fit(pressures, &vs);
        summary.insert("fit.p0_Pa".into(), json!(-1.0 / slope));
        summary.insert("fit.max_log_residual".into(), json!(resid));
    }
    summary.insert("p0_Pa".into(), json!(r.p0));
    summary.insert("sigma_eff_m2".into(), json!(r.sigma_eff));
    summary.insert("gas".into(), json!({"name": gas.name, "c6_J_m6": gas.c6, "c6_source": src.as_str()}));

    if let Some(settings) = &ctx.cfg.beamline {
        let spec = ctx.beamline(settings, mean_speed)?;
        let source = SourceDistribution::Effusive {
            temperature: settings.oven_temperature,
            molecule_mass: interf.molecule_mass,
        };
        let curve = corrected_visibility(&spec, &source, &interf, &gas, pressures, &ctx.mc_options(settings))
            .map_err(|e| ctx.fail("beamline", e))?;
        for pt in &curve.points {
            let mut row = ReportRow::new("corrected", pt.pressure);
            row.visibility_h1 = Some(pt.corrected);
            row.p0 = Some(curve.p0);
            rows.push(row);
        }
        for pt in &curve.points {
            let mut row = ReportRow::new("uncorrected", pt.pressure);
            row.visibility_h1 = Some(pt.uncorrected);
            row.p0 = Some(curve.p0);
            rows.push(row);
        }
        summary.insert("beamline.mean_speed_m_s".into(), json!(curve.mean_speed));
        summary.insert("beamline.fwhm_m_s".into(), json!(curve.fwhm));
        summary.insert(
            "beamline.attenuation".into(),
            json!(curve.points.iter().map(|p| p.attenuation).collect::<Vec<_>>()),
        );
    }
    Ok(rows)
}

fn run_fringe(
    ctx: &Ctx,
    mean_speed: f64,
    points: usize,
    pressures: &[f64],
    summary: &mut BTreeMap<String, Value>,
) -> Result<Vec<ReportRow>, ScenarioError> {
    let interf = ctx.interferometer(None, None)?;
    let dist = &ctx.molecule().velocity;
    let gas = if ctx.cfg.gas.is_some() { Some(ctx.gas()?.0) } else { None };
    let mut rows = Vec::new();
    for &p in pressures {
        let signal = match &gas {
            Some(g) => decohered_signal(&interf, dist, mean_speed, g, &ctx.cfg.decoherence, p)
                .map_err(|e| ctx.fail("fringe", e))?,
            None => interf
                .averaged_signal(mean_speed, dist, SignalKind::Quantum)
                .map_err(|e| ctx.fail("fringe", e))?,
        };
        let vis = visibility(&signal).map_err(|e| ctx.fail("fringe", e))?;
        let label = format!("p={p:e}Pa");
        let (xs, ys) = signal.samples(points);
        for (x, y) in xs.into_iter().zip(ys) {
            let mut row = ReportRow::new(&label, x);
            row.signal = Some(y);
            row.visibility_h1 = Some(vis.first_harmonic);
            row.visibility_minmax = Some(vis.minmax);
            row.mean_level = Some(vis.mean);
            rows.push(row);
        }
        summary.insert(format!("{label}.visibility_h1"), json!(vis.first_harmonic));
    }
    Ok(rows)
}

fn run_table(
    ctx: &Ctx,
    table: &TableScan,
    summary: &mut BTreeMap<String, Value>,
) -> Result<Vec<ReportRow>, ScenarioError> {
    let model = ctx.cfg.decoherence;
    let temperature = ctx.cfg.temperature;
    let factor = model.convention.factor();
    let mut rows = Vec::new();
    match table {
        TableScan::Gases {
            separation,
            mean_speed,
            gases,
        } => {
            let entries: Vec<_> = match gases {
                Some(names) => names
                    .iter()
                    .map(|n| {
                        ctx.db.find(n).cloned().ok_or_else(|| ConfigError::Invalid {
                            path: "table.gases".into(),
                            message: format!("unknown gas {n:?}"),
                        })
                    })
                    .collect::<Result<_, _>>()?,
                None => ctx.db.gases.clone(),
            };
            let r = ctx.db.reference;
            let at_reference = (separation - r.separation).abs() <= 1e-12 * r.separation
                && (mean_speed - r.mean_speed).abs() <= 1e-12 * r.mean_speed
                && (temperature - r.temperature).abs() <= 1e-12 * r.temperature;
            for e in entries {
                let (gas, src) = ctx.db.resolve(&e, temperature)?;
                let sigma = sigma_eff(&gas, *mean_speed, model.cross_section).map_err(|x| ctx.fail(&gas.name, x))?;
                let mut row = ReportRow::new(&gas.name, gas.mass);
                row.sigma_eff = Some(sigma);
                row.p0 = Some(p0_from_sigma_eff(sigma, *separation, temperature) / factor);
                if at_reference {
                    row.reference_p0 = e.p0_theory;
                    row.reference_sigma_eff = e.p0_theory.map(|p| sigma_eff_from_p0(p, *separation, temperature));
                }
                summary.insert(
                    format!("{}.c6", gas.name),
                    json!({
                        "c6_J_m6": gas.c6,
                        "source": src.as_str(),
                        "p0_experiment_Pa": e.p0_experiment,
                        "p0_experiment_error_Pa": e.p0_experiment_error,
                    }),
                );
                rows.push(row);
            }
        }
        TableScan::Candidates {
            separation,
            mean_speed,
            candidates,
        } => {
            let (gas, _) = ctx.gas()?;
            let (ag, ng) = match (gas.polarizability, gas.valence_electrons) {
                (Some(a), Some(n)) => (a, n),
                _ => {
                    return Err(ConfigError::Invalid {
                        path: "gas".into(),
                        message: "candidate table needs gas polarizability and valence electrons".into(),
                    }
                    .into())
                }
            };
            for c in candidates {
                if let Some(s) = c.sigma_eff {
                    let mut row = ReportRow::new(&format!("{}:tabulated_sigma", c.name), c.mass);
                    row.sigma_eff = Some(s);
                    row.p0 = Some(p0_from_sigma_eff(s, *separation, temperature) / factor);
                    row.reference_p0 = c.p0;
                    row.reference_sigma_eff = c.sigma_eff;
                    rows.push(row);
                }
            }
            for c in candidates {
                let alpha = c
                    .polarizability
                    .unwrap_or_else(|| polarizability_from_mass(c.mass / crate::constants::AMU));
                let c6 = slater_kirkwood_c6(alpha, c.valence_electrons, ag, ng).map_err(|e| ctx.fail(&c.name, e))?;
                let g = GasSpec { c6, ..gas.clone() };
                let sigma = sigma_eff(&g, *mean_speed, model.cross_section).map_err(|e| ctx.fail(&c.name, e))?;
                let mut row = ReportRow::new(&format!("{}:slater_kirkwood", c.name), c.mass);
                row.sigma_eff = Some(sigma);
                row.p0 = Some(p0_from_sigma_eff(sigma, *separation, temperature) / factor);
                row.reference_p0 = c.p0;
                row.reference_sigma_eff = c.sigma_eff;
                rows.push(row);
                summary.insert(
                    format!("{}.slater_kirkwood", c.name),
                    json!({"polarizability_A3": alpha / ANGSTROM3, "valence_electrons": c.valence_electrons, "c6_J_m6": c6}),
                );
            }
        }
    }
    Ok(rows)
}
