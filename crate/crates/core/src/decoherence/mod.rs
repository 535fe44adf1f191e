//! Collisional decoherence by a thermal background gas.
//!
//! Each harmonic `m ≠ 0` of the fringe signal is damped by
//! `exp(−n σ_eff ∫₀^{2L} [1 − η(m (L−|z−L|) d/L_T)] dz)`; the mean level is
//! untouched. The strong-collision limit replaces the integral by `2L`.

pub mod cross_section;
pub mod scattering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{most_probable_speed, ANGSTROM3, BOLTZMANN, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, VACUUM_PERMITTIVITY};
use crate::quadrature::{integrate_with_breaks, QuadratureError, Tolerance};
use crate::talbot_lau::{talbot_length, visibility, FringeSignal, Interferometer, SignalKind, TalbotError, VelocityDistribution, Visibility};

pub use cross_section::{
    c6_from_sigma_eff, g_truncated, mass_scaling_exponent, sigma_eff, sigma_eff_asymptotic, sigma_eff_numeric,
    sigma_eff_with, sigma_total, CrossSectionMethod,
};
pub use scattering::{
    angular_average, decoherence_function, decoherence_function_monochromatic, AngularShape, ScatteringModel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecoherenceError {
    #[error("invalid gas: {0}")]
    InvalidGas(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("gas {0} has no C6 coefficient")]
    MissingC6(String),
    #[error("quadrature failed for {context}: {source}")]
    Quadrature {
        context: String,
        #[source]
        source: QuadratureError,
    },
    #[error("mass scaling needs at least two distinct masses")]
    DegenerateFit,
    #[error(transparent)]
    Talbot(#[from] TalbotError),
}

/// Background gas species at a given temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSpec {
    pub name: String,
    /// kg
    pub mass: f64,
    /// K
    pub temperature: f64,
    /// J m⁶; zero when unknown
    pub c6: f64,
    /// Polarizability volume, m³.
    pub polarizability: Option<f64>,
    pub valence_electrons: Option<f64>,
}

impl GasSpec {
    pub fn new(name: &str, mass: f64, temperature: f64, c6: f64) -> Result<Self, DecoherenceError> {
        let gas = Self {
            name: name.to_string(),
            mass,
            temperature,
            c6,
            polarizability: None,
            valence_electrons: None,
        };
        gas.validate()?;
        Ok(gas)
    }

    pub fn validate(&self) -> Result<(), DecoherenceError> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(DecoherenceError::InvalidGas(format!("{}: mass must be positive", self.name)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(DecoherenceError::InvalidGas(format!("{}: temperature must be positive", self.name)));
        }
        if !(self.c6 >= 0.0 && self.c6.is_finite()) {
            return Err(DecoherenceError::InvalidGas(format!("{}: C6 must be >= 0", self.name)));
        }
        if let Some(a) = self.polarizability {
            if !(a > 0.0) {
                return Err(DecoherenceError::InvalidGas(format!("{}: polarizability must be positive", self.name)));
            }
        }
        if let Some(n) = self.valence_electrons {
            if !(n > 0.0) {
                return Err(DecoherenceError::InvalidGas(format!(
                    "{}: valence electron count must be positive",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn require_c6(&self) -> Result<(), DecoherenceError> {
        if self.c6 > 0.0 {
            Ok(())
        } else {
            Err(DecoherenceError::MissingC6(self.name.clone()))
        }
    }

    /// `v* = (2 k_B T / m_g)^{1/2}`.
    pub fn most_probable_speed(&self) -> f64 {
        most_probable_speed(self.mass, self.temperature)
    }

    /// `n = p/(k_B T)`.
    pub fn number_density(&self, pressure: f64) -> f64 {
        pressure / (BOLTZMANN * self.temperature)
    }
}

/// `p0 = k_B T / (2 L σ_eff)`.
pub fn p0_from_sigma_eff(sigma_eff: f64, separation: f64, temperature: f64) -> f64 {
    BOLTZMANN * temperature / (2.0 * separation * sigma_eff)
}

/// `σ_eff = k_B T / (2 L p0)`.
pub fn sigma_eff_from_p0(p0: f64, separation: f64, temperature: f64) -> f64 {
    BOLTZMANN * temperature / (2.0 * separation * p0)
}

/// Decoherence pressure of a gas for molecules at `mean_speed`.
pub fn decoherence_pressure(
    gas: &GasSpec,
    separation: f64,
    mean_speed: f64,
    method: CrossSectionMethod,
) -> Result<f64, DecoherenceError> {
    Ok(p0_from_sigma_eff(sigma_eff(gas, mean_speed, method)?, separation, gas.temperature))
}

/// How the z-integral over collision positions is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZIntegral {
    /// Every collision fully decoheres: integral = `2L` for `m ≠ 0`.
    #[default]
    StrongCollision,
    /// Quadrature with the decoherence function.
    Full,
}

/// Overall rate normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    #[default]
    Standard,
    /// Older master equation whose localisation rate is larger by `2π`.
    GallisFleming,
}

impl RateConvention {
    pub fn factor(&self) -> f64 {
        match self {
            RateConvention::Standard => 1.0,
            RateConvention::GallisFleming => 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoherenceModel {
    pub scattering: ScatteringModel,
    pub cross_section: CrossSectionMethod,
    pub z_integral: ZIntegral,
    pub convention: RateConvention,
}

/// `∫₀^{2L} [1 − η(m (L−|z−L|) d / L_T)] dz`.
pub fn collision_path_integral(
    m: i64,
    gas: &GasSpec,
    model: &DecoherenceModel,
    separation: f64,
    period: f64,
    wavelength: f64,
) -> Result<f64, DecoherenceError> {
    let m = m.unsigned_abs();
    if m == 0 {
        return Ok(0.0);
    }
    match model.z_integral {
        ZIntegral::StrongCollision => Ok(2.0 * separation),
        ZIntegral::Full => {
            // z' = L − |z − L| runs over [0, L] twice; r = m z' d / L_T
            let lt = talbot_length(period, wavelength);
            let scale = m as f64 * period / lt;
            let r_max = scale * separation;
            let mut points = vec![0.0];
            let mut r = 1e-14;
            while r < r_max {
                points.push(r);
                r *= 10.0;
            }
            points.push(r_max);
            let scattering = model.scattering;
            let eta_integral = integrate_with_breaks(
                |r: f64| decoherence_function(gas, scattering, r).unwrap_or(f64::NAN),
                &points,
                Tolerance::new(1e-8 * r_max, 1e-7).with_max_intervals(2000),
            )
            .map_err(|source| DecoherenceError::Quadrature {
                context: format!("collision path integral for m = {m}"),
                source,
            })?;
            Ok(2.0 * separation - 2.0 * eta_integral.value / scale)
        }
    }
}

/// Exponent `n σ_eff ∫[1−η] dz` damping harmonic `m` at molecule speed `speed`.
#[allow(clippy::too_many_arguments)]
pub fn damping_exponent(
    m: i64,
    gas: &GasSpec,
    model: &DecoherenceModel,
    pressure: f64,
    separation: f64,
    period: f64,
    wavelength: f64,
    speed: f64,
) -> Result<f64, DecoherenceError> {
    if !(pressure >= 0.0) {
        return Err(DecoherenceError::InvalidInput(format!("pressure must be >= 0, got {pressure}")));
    }
    if m == 0 || pressure == 0.0 {
        return Ok(0.0);
    }
    let n = gas.number_density(pressure);
    let sigma = sigma_eff(gas, speed, model.cross_section)?;
    let path = collision_path_integral(m, gas, model, separation, period, wavelength)?;
    Ok(model.convention.factor() * n * sigma * path)
}

/// `B^λ_{2m}` after collisional decoherence.
#[allow(clippy::too_many_arguments)]
pub fn b_decohered(
    m: i64,
    b_lambda_2m: Complex64,
    gas: &GasSpec,
    model: &DecoherenceModel,
    pressure: f64,
    separation: f64,
    period: f64,
    wavelength: f64,
    speed: f64,
) -> Result<Complex64, DecoherenceError> {
    let k = damping_exponent(m, gas, model, pressure, separation, period, wavelength, speed)?;
    Ok(b_lambda_2m * (-k).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressurePoint {
    /// Pa
    pub pressure: f64,
    /// Velocity-averaged signal visibility.
    pub visibility: Visibility,
    /// `V(0) exp(−p/p0)` at the mean speed.
    pub exponential_law: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceResult {
    /// m², at the mean speed
    pub sigma_eff: f64,
    /// Pa
    pub p0: f64,
    pub curve: Vec<PressurePoint>,
}

/// Visibility versus background pressure. Per-speed damping factors are
/// applied to the signal harmonics before velocity averaging.
pub fn visibility_vs_pressure(
    interferometer: &Interferometer,
    distribution: &VelocityDistribution,
    mean_speed: f64,
    gas: &GasSpec,
    model: &DecoherenceModel,
    pressures: &[f64],
) -> Result<DecoherenceResult, DecoherenceError> {
    gas.validate()?;
    if pressures.iter().any(|&p| !(p >= 0.0)) {
        return Err(DecoherenceError::InvalidInput("pressures must be >= 0".into()));
    }
    let sigma_mean = sigma_eff(gas, mean_speed, model.cross_section)?;
    let separation = interferometer.separation;
    let period = interferometer.period();
    let p0 = p0_from_sigma_eff(sigma_mean, separation, gas.temperature) / model.convention.factor();

    // exponent per unit pressure for each (speed node, harmonic)
    let nodes = distribution.nodes(mean_speed)?;
    let mut rates: Vec<(f64, Vec<f64>)> = Vec::with_capacity(nodes.len());
    for &(v, _) in &nodes {
        let lambda = interferometer.wavelength(v);
        let per_m = (0..=interferometer.m_max as i64)
            .map(|m| damping_exponent(m, gas, model, 1.0, separation, period, lambda, v))
            .collect::<Result<Vec<_>, _>>()?;
        rates.push((v, per_m));
    }
    let rate_for = |v: f64, m: usize| -> f64 {
        rates
            .iter()
            .find(|(u, _)| *u == v)
            .map_or(0.0, |(_, r)| r[m])
    };

    let v0 = visibility(&interferometer.averaged_signal(mean_speed, distribution, SignalKind::Quantum)?)?;
    let mut curve = Vec::with_capacity(pressures.len());
    for &p in pressures {
        let signal = interferometer.averaged_signal_with(mean_speed, distribution, SignalKind::Quantum, |v, m| {
            (-p * rate_for(v, m)).exp()
        })?;
        curve.push(PressurePoint {
            pressure: p,
            visibility: visibility(&signal)?,
            exponential_law: v0.first_harmonic * (-p / p0).exp(),
        });
    }
    Ok(DecoherenceResult {
        sigma_eff: sigma_mean,
        p0,
        curve,
    })
}

/// Velocity-averaged fringe signal at one background pressure.
pub fn decohered_signal(
    interferometer: &Interferometer,
    distribution: &VelocityDistribution,
    mean_speed: f64,
    gas: &GasSpec,
    model: &DecoherenceModel,
    pressure: f64,
) -> Result<FringeSignal, DecoherenceError> {
    gas.validate()?;
    if !(pressure >= 0.0) {
        return Err(DecoherenceError::InvalidInput("pressure must be >= 0".into()));
    }
    let separation = interferometer.separation;
    let period = interferometer.period();
    let mut rates: Vec<(f64, Vec<f64>)> = Vec::new();
    for (v, _) in distribution.nodes(mean_speed)? {
        let lambda = interferometer.wavelength(v);
        let per_m = (0..=interferometer.m_max as i64)
            .map(|m| damping_exponent(m, gas, model, pressure, separation, period, lambda, v))
            .collect::<Result<Vec<_>, _>>()?;
        rates.push((v, per_m));
    }
    let signal = interferometer.averaged_signal_with(mean_speed, distribution, SignalKind::Quantum, |v, m| {
        rates.iter().find(|(u, _)| *u == v).map_or(1.0, |(_, r)| (-r[m]).exp())
    })?;
    Ok(signal)
}

/// Slater–Kirkwood dispersion coefficient from polarizability volumes
/// (m³) and effective valence electron numbers:
///
/// `C6 = (3/2) ħ e' m_e^{−1/2} α_A α_B / (√(α_A/N_A) + √(α_B/N_B))`
///
/// with `e' = e/√(4πε₀)` the Gaussian-unit charge, so that volumes in m³
/// yield `C6` in J m⁶.
pub fn slater_kirkwood_c6(alpha_a: f64, n_a: f64, alpha_b: f64, n_b: f64) -> Result<f64, DecoherenceError> {
    if !(alpha_a > 0.0 && alpha_b > 0.0 && n_a > 0.0 && n_b > 0.0) {
        return Err(DecoherenceError::InvalidInput(
            "Slater-Kirkwood needs positive polarizabilities and electron numbers".into(),
        ));
    }
    let charge = ELEMENTARY_CHARGE / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY).sqrt();
    let pre = 1.5 * HBAR * charge / ELECTRON_MASS.sqrt();
    Ok(pre * (alpha_a * alpha_b) / ((alpha_a / n_a).sqrt() + (alpha_b / n_b).sqrt()))
}

/// Polarizability volume (m³) of a large molecule from its mass in amu,
/// `α/Å³ = 0.123 · M/amu`.
pub fn polarizability_from_mass(mass_amu: f64) -> f64 {
    0.123 * mass_amu * ANGSTROM3
}
