//! Angular scattering models and the decoherence function η(Δr).
//!
//! With `u = sin(θ/2)` the solid angle element is `dΩ = 8πu du` and the
//! sinc argument is `a·u`, `a = 2 m_g v_g Δr / ħ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cross_section::sigma_total;
use super::{DecoherenceError, GasSpec};
use crate::constants::HBAR;
use crate::quadrature::{integrate, integrate_oscillatory, integrate_with_breaks, Tolerance};

/// Shape of `|f(cos θ)|²`, always normalised so that `∫|f|² dΩ = σ(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScatteringModel {
    /// Constant amplitude.
    #[default]
    Isotropic,
    /// Gaussian in `sin(θ/2)` with characteristic angle
    /// `θ0 = width_scale / (k b)`, `k = m_g v/ħ`, `b = (σ(v)/π)^{1/2}`.
    ForwardPeaked { width_scale: f64 },
}

/// `|f|²/σ` per steradian as a function of `u = sin(θ/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularShape {
    Isotropic,
    Gaussian { u0: f64 },
}

impl AngularShape {
    pub fn density(&self, u: f64) -> f64 {
        match *self {
            AngularShape::Isotropic => 1.0 / (4.0 * PI),
            AngularShape::Gaussian { u0 } => {
                let norm = 4.0 * PI * u0 * u0 * -(-1.0 / (u0 * u0)).exp_m1();
                (-(u / u0).powi(2)).exp() / norm
            }
        }
    }

    /// Upper limit in `u` beyond which the density is negligible.
    fn support(&self) -> f64 {
        match *self {
            AngularShape::Isotropic => 1.0,
            AngularShape::Gaussian { u0 } => (8.0 * u0).min(1.0),
        }
    }
}

impl ScatteringModel {
    pub fn shape(&self, gas: &GasSpec, gas_speed: f64) -> Result<AngularShape, DecoherenceError> {
        match *self {
            ScatteringModel::Isotropic => Ok(AngularShape::Isotropic),
            ScatteringModel::ForwardPeaked { width_scale } => {
                if !(width_scale > 0.0) {
                    return Err(DecoherenceError::InvalidInput(format!(
                        "forward-peaked width scale must be positive, got {width_scale}"
                    )));
                }
                gas.require_c6()?;
                let k = gas.mass * gas_speed / HBAR;
                let b = (sigma_total(gas.c6, gas_speed) / PI).sqrt();
                let theta0 = (width_scale / (k * b)).min(PI);
                Ok(AngularShape::Gaussian {
                    u0: (0.5 * theta0).sin(),
                })
            }
        }
    }

    /// `∫|f|² dΩ` for the model at `gas_speed`, by quadrature.
    pub fn integrated_cross_section(&self, gas: &GasSpec, gas_speed: f64) -> Result<f64, DecoherenceError> {
        let shape = self.shape(gas, gas_speed)?;
        let sigma = sigma_total(gas.c6, gas_speed);
        let est = integrate(
            |u: f64| 8.0 * PI * u * sigma * shape.density(u),
            0.0,
            1.0,
            Tolerance::new(0.0, 1e-12),
        )
        .map_err(|source| DecoherenceError::Quadrature {
            context: "angular normalisation".into(),
            source,
        })?;
        Ok(est.value)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Angular part `(1/σ)∫|f|² sinc(a·u) dΩ` for a given shape.
pub fn angular_average(shape: AngularShape, a: f64) -> Result<f64, DecoherenceError> {
    let top = shape.support();
    let tol = Tolerance::new(1e-12, 1e-10).with_max_intervals(4000);
    let err = |source| DecoherenceError::Quadrature {
        context: format!("angular integral at a = {a:e}"),
        source,
    };
    if a * top <= 50.0 {
        let est = integrate(|u: f64| 8.0 * PI * u * shape.density(u) * sinc(a * u), 0.0, top, tol).map_err(err)?;
        return Ok(est.value);
    }
    // ∫ 8π w(u) sin(a u)/a du, with the oscillation handled analytically
    let mut points = vec![0.0];
    if let AngularShape::Gaussian { u0 } = shape {
        for k in [1.0, 2.0, 4.0] {
            if k * u0 < top {
                points.push(k * u0);
            }
        }
    }
    points.push(top);
    let est = integrate_oscillatory(|u| 8.0 * PI * shape.density(u) / a, a, &points, tol).map_err(err)?;
    Ok(est.value.im)
}

/// Monochromatic gas: `η` for gas particles of a single speed.
pub fn decoherence_function_monochromatic(
    gas: &GasSpec,
    model: ScatteringModel,
    gas_speed: f64,
    delta_r: f64,
) -> Result<f64, DecoherenceError> {
    let shape = model.shape(gas, gas_speed)?;
    angular_average(shape, 2.0 * gas.mass * gas_speed * delta_r / HBAR)
}

/// Decoherence function `η(Δr)` averaged over the Maxwell speed
/// distribution of the gas.
pub fn decoherence_function(gas: &GasSpec, model: ScatteringModel, delta_r: f64) -> Result<f64, DecoherenceError> {
    if !(delta_r >= 0.0 && delta_r.is_finite()) {
        return Err(DecoherenceError::InvalidInput(format!(
            "separation must be non-negative, got {delta_r}"
        )));
    }
    let v_star = gas.most_probable_speed();
    let alpha = 2.0 * gas.mass * v_star * delta_r / HBAR;
    // x = v_g/v*; the Maxwell tail beyond x = 8 is below 1e-26
    let mut points = vec![0.0];
    let mut a = 1.0;
    while a < 1e12 {
        let x = a / alpha;
        if x >= 8.0 {
            break;
        }
        if x > 0.0 {
            points.push(x);
        }
        a *= 10.0;
    }
    points.push(8.0);
    let integrand = |x: f64| -> f64 {
        let g = 4.0 / PI.sqrt() * x * x * (-x * x).exp();
        if g == 0.0 {
            return 0.0;
        }
        let shape = match model.shape(gas, x * v_star) {
            Ok(s) => s,
            Err(_) => return f64::NAN,
        };
        match angular_average(shape, alpha * x) {
            Ok(v) => g * v,
            Err(_) => f64::NAN,
        }
    };
    let est = integrate_with_breaks(integrand, &points, Tolerance::new(1e-10, 0.0).with_max_intervals(20_000))
        .map_err(|source| DecoherenceError::Quadrature {
            context: format!("η at Δr = {delta_r:e} m"),
            source,
        })?;
    Ok(est.value)
}
