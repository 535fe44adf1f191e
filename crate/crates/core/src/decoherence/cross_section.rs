//! Semiclassical van der Waals cross sections and their thermal averages.

use std::f64::consts::PI;

use log::warn;
use statrs::function::gamma::gamma;

use super::{DecoherenceError, GasSpec};
use crate::constants::HBAR;
use crate::quadrature::{integrate, integrate_with_breaks, Tolerance};

/// `σ(v) = K·v^{−2/5}` with `K = (3π⁶C6/8ħ)^{2/5}/(Γ(2/5) sin(π/5))`.
fn prefactor(c6: f64) -> f64 {
    (3.0 * PI.powi(6) * c6 / (8.0 * HBAR)).powf(0.4) / (gamma(0.4) * (PI / 5.0).sin())
}

/// Total cross section at relative speed `v` for `U(r) = −C6/r⁶`.
pub fn sigma_total(c6: f64, speed: f64) -> f64 {
    prefactor(c6) * speed.powf(-0.4)
}

/// `G(u)` truncated after the `u²` term.
pub fn g_truncated(u: f64) -> f64 {
    gamma(1.8) * (1.0 - u * u) + 2.0 / 3.0 * gamma(2.8) * u * u
}

/// Asymptotic (small thermal gas speed) effective cross section.
pub fn sigma_eff_asymptotic(gas: &GasSpec, mean_speed: f64) -> Result<f64, DecoherenceError> {
    gas.require_c6()?;
    positive_speed(mean_speed)?;
    let v_star = gas.most_probable_speed();
    let u = mean_speed / v_star;
    if u > 0.7 {
        warn!(
            "asymptotic σ_eff used at u = v_m/v* = {u:.3} for {}; the u² truncation is unreliable above 0.7",
            gas.name
        );
    }
    Ok(2.0 * prefactor(gas.c6) / PI.sqrt() * v_star.powf(0.6) / mean_speed * g_truncated(u))
}

/// Inverts [`sigma_eff_asymptotic`] for `C6` (σ_eff ∝ C6^{2/5}).
pub fn c6_from_sigma_eff(gas: &GasSpec, mean_speed: f64, sigma_eff: f64) -> Result<f64, DecoherenceError> {
    if !(sigma_eff > 0.0) {
        return Err(DecoherenceError::InvalidInput(format!(
            "effective cross section must be positive, got {sigma_eff}"
        )));
    }
    let unit = GasSpec { c6: 1.0, ..gas.clone() };
    let reference = sigma_eff_asymptotic(&unit, mean_speed)?;
    Ok((sigma_eff / reference).powf(2.5))
}

/// Thermal average of `σ(|v_m e_z − v_g|)·|v_m e_z − v_g| / v_m` over a
/// Maxwell gas, for an arbitrary cross section law `sigma(v)`.
pub fn sigma_eff_with<F>(sigma: F, gas: &GasSpec, mean_speed: f64) -> Result<f64, DecoherenceError>
where
    F: Fn(f64) -> f64,
{
    positive_speed(mean_speed)?;
    let v_star = gas.most_probable_speed();
    let u = mean_speed / v_star;
    let flux = |v: f64| if v > 0.0 { sigma(v) * v } else { 0.0 };
    let inner_tol = Tolerance::new(0.0, 1e-11).with_max_intervals(2000);
    // x = v_g / v*, c = cos(angle between v_g and e_z)
    let outer = |x: f64| -> f64 {
        let weight = 4.0 / PI.sqrt() * x * x * (-x * x).exp();
        if weight == 0.0 {
            return 0.0;
        }
        let rel = |c: f64| v_star * (x * x + u * u - 2.0 * x * u * c).max(0.0).sqrt();
        match integrate(|c: f64| flux(rel(c)), -1.0, 1.0, inner_tol) {
            Ok(e) => weight * 0.5 * e.value,
            Err(_) => f64::NAN,
        }
    };
    let mut points = vec![0.0];
    if u > 0.0 && u < 8.0 {
        points.push(u);
    }
    points.push(8.0_f64.max(u + 8.0));
    let est = integrate_with_breaks(outer, &points, Tolerance::new(0.0, 1e-9).with_max_intervals(4000))
        .map_err(|source| DecoherenceError::Quadrature {
            context: format!("σ_eff at v_m = {mean_speed} m/s"),
            source,
        })?;
    Ok(est.value / mean_speed)
}

/// Effective cross section by direct quadrature of the thermal average.
pub fn sigma_eff_numeric(gas: &GasSpec, mean_speed: f64) -> Result<f64, DecoherenceError> {
    gas.require_c6()?;
    let c6 = gas.c6;
    sigma_eff_with(|v| sigma_total(c6, v), gas, mean_speed)
}

/// How σ_eff is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossSectionMethod {
    #[default]
    Numeric,
    Asymptotic,
}

pub fn sigma_eff(gas: &GasSpec, mean_speed: f64, method: CrossSectionMethod) -> Result<f64, DecoherenceError> {
    match method {
        CrossSectionMethod::Numeric => sigma_eff_numeric(gas, mean_speed),
        CrossSectionMethod::Asymptotic => sigma_eff_asymptotic(gas, mean_speed),
    }
}

fn positive_speed(v: f64) -> Result<(), DecoherenceError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DecoherenceError::InvalidInput(format!("molecule speed must be positive, got {v}")))
    }
}

/// Log-log slope of σ_eff against gas mass for a family of gases with
/// `C6 = c6_of_mass(m_g)` at fixed temperature and molecule speed.
pub fn mass_scaling_exponent<F>(
    masses: &[f64],
    c6_of_mass: F,
    temperature: f64,
    mean_speed: f64,
    method: CrossSectionMethod,
) -> Result<f64, DecoherenceError>
where
    F: Fn(f64) -> f64,
{
    let mut distinct: Vec<f64> = masses.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(DecoherenceError::DegenerateFit);
    }
    let mut xs = Vec::with_capacity(masses.len());
    let mut ys = Vec::with_capacity(masses.len());
    for &m in masses {
        let gas = GasSpec::new("family", m, temperature, c6_of_mass(m))?;
        xs.push(m.ln());
        ys.push(sigma_eff(&gas, mean_speed, method)?.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
