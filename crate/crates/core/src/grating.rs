//! Grating transmission functions and their Fourier / autocorrelation
//! coefficients.
//!
//! Coordinates: one period is `[-d/2, d/2)` with the slit centred at `x = 0`,
//! so a symmetric transmission has real coefficients. Inside the slit the
//! distance to the left wall is `ξ = x + w/2`.
//!
//! Two routes to the B-coefficients are provided:
//!
//! * [`FourierSpectrum`] builds them from truncated sums over `a_ℓ`;
//! * [`TransmissionProfile`] evaluates the equivalent overlap integrals
//!   directly, which carries no truncation error.
//!
//! Both implement [`GratingCoefficients`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::HBAR;
use crate::quadrature::{integrate_with_breaks, QuadratureError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GratingError {
    #[error("invalid grating: {0}")]
    InvalidSpec(String),
    #[error("position ξ = {xi:e} m lies outside the open slit (0, {width:e}) m")]
    OutsideSlit { xi: f64, width: f64 },
    #[error("Fourier cutoff must be at least 1")]
    InvalidCutoff,
    #[error("molecule speed must be positive, got {0}")]
    InvalidSpeed(f64),
    #[error("Fourier coefficient a_{l} did not converge: {source}")]
    Coefficient {
        l: i64,
        #[source]
        source: QuadratureError,
    },
    #[error("overlap coefficient B_{m} did not converge: {source}")]
    Overlap {
        m: i64,
        #[source]
        source: QuadratureError,
    },
}

/// Material grating: period, open fraction, wall thickness and the
/// molecule–wall interaction constant `C3` (J m³, zero disables it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub period: f64,
    pub open_fraction: f64,
    pub thickness: f64,
    pub c3: f64,
}

impl GratingSpec {
    pub fn new(period: f64, open_fraction: f64, thickness: f64, c3: f64) -> Result<Self, GratingError> {
        let spec = Self {
            period,
            open_fraction,
            thickness,
            c3,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Ideal binary mask without wall interaction.
    pub fn binary(period: f64, open_fraction: f64) -> Result<Self, GratingError> {
        Self::new(period, open_fraction, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<(), GratingError> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(GratingError::InvalidSpec(format!("period must be positive, got {}", self.period)));
        }
        if !(self.open_fraction > 0.0 && self.open_fraction < 1.0) {
            return Err(GratingError::InvalidSpec(format!(
                "open fraction must lie in (0, 1), got {}",
                self.open_fraction
            )));
        }
        if !(self.thickness >= 0.0 && self.thickness.is_finite()) {
            return Err(GratingError::InvalidSpec(format!("thickness must be >= 0, got {}", self.thickness)));
        }
        if !(self.c3 >= 0.0 && self.c3.is_finite()) {
            return Err(GratingError::InvalidSpec(format!("C3 must be >= 0, got {}", self.c3)));
        }
        Ok(())
    }

    pub fn open_width(&self) -> f64 {
        self.open_fraction * self.period
    }

    /// `C3 b / (ħ v)` in m³.
    pub fn phase_strength(&self, speed: f64) -> f64 {
        self.c3 * self.thickness / (HBAR * speed)
    }

    pub fn has_wall_interaction(&self) -> bool {
        self.c3 > 0.0 && self.thickness > 0.0
    }
}

/// Numerical knobs for transmission functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingOptions {
    /// Phase beyond which the slit is treated as opaque.
    pub phi_max: f64,
    /// Cutoff of the Fourier series route.
    pub l_max: usize,
    pub tolerance: Tolerance,
}

impl Default for GratingOptions {
    fn default() -> Self {
        Self {
            phi_max: 50.0,
            l_max: 40,
            tolerance: Tolerance::new(1e-14, 1e-8),
        }
    }
}

/// Two-wall eikonal phase `C3 b/(ħv) · (ξ⁻³ + (w−ξ)⁻³)` at distance `ξ` from
/// the left wall. The eikonal phase is independent of the molecular mass.
pub fn eikonal_phase(spec: &GratingSpec, xi: f64, speed: f64) -> Result<f64, GratingError> {
    let w = spec.open_width();
    if !(xi > 0.0 && xi < w) {
        return Err(GratingError::OutsideSlit { xi, width: w });
    }
    if !(speed > 0.0) {
        return Err(GratingError::InvalidSpeed(speed));
    }
    Ok(wall_phase(spec.phase_strength(speed), xi, w))
}

fn wall_phase(kappa: f64, xi: f64, w: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    kappa * (xi.powi(-3) + (w - xi).powi(-3))
}

/// Transmission function of one grating for molecules of a given speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionProfile {
    pub spec: GratingSpec,
    pub speed: f64,
    pub phi_max: f64,
    kappa: f64,
    // half width of the transmitting region around x = 0; zero if dark
    half_open: f64,
    tolerance: Tolerance,
}

/// Builds `t(x)` with the wall phase clipped at `options.phi_max`.
pub fn transmission_function(
    spec: &GratingSpec,
    speed: f64,
    options: &GratingOptions,
) -> Result<TransmissionProfile, GratingError> {
    TransmissionProfile::new(spec, speed, options)
}

impl TransmissionProfile {
    pub fn new(spec: &GratingSpec, speed: f64, options: &GratingOptions) -> Result<Self, GratingError> {
        spec.validate()?;
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(GratingError::InvalidSpeed(speed));
        }
        if !(options.phi_max > 0.0) {
            return Err(GratingError::InvalidSpec(format!(
                "phase clip must be positive, got {}",
                options.phi_max
            )));
        }
        let w = spec.open_width();
        let kappa = if spec.has_wall_interaction() {
            spec.phase_strength(speed)
        } else {
            0.0
        };
        let clip = clip_distance(kappa, w, options.phi_max);
        let half_open = (0.5 * w - clip).max(0.0);
        Ok(Self {
            spec: *spec,
            speed,
            phi_max: options.phi_max,
            kappa,
            half_open,
            tolerance: options.tolerance,
        })
    }

    /// Transmitting interval `[-h, h]` inside one period, `None` if the
    /// phase exceeds the clip everywhere.
    pub fn open_interval(&self) -> Option<(f64, f64)> {
        (self.half_open > 0.0).then_some((-self.half_open, self.half_open))
    }

    /// Distance from each wall that is treated as opaque.
    pub fn clip_distance(&self) -> f64 {
        0.5 * self.spec.open_width() - self.half_open
    }

    /// `(1/d)∫|t|²`: transmitted fraction of a uniform wave.
    pub fn effective_open_fraction(&self) -> f64 {
        2.0 * self.half_open / self.spec.period
    }

    /// Phase at `x` (period-reduced), zero outside the open region.
    pub fn phase(&self, x: f64) -> f64 {
        let x = reduce(x, self.spec.period);
        if x.abs() > self.half_open {
            return 0.0;
        }
        self.phase_centered(x)
    }

    fn phase_centered(&self, x: f64) -> f64 {
        let w = self.spec.open_width();
        wall_phase(self.kappa, 0.5 * w + x, w)
    }

    /// `t(x)`, periodic with period `d`.
    pub fn at(&self, x: f64) -> Complex64 {
        let x = reduce(x, self.spec.period);
        if x.abs() > self.half_open {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(1.0, self.phase_centered(x))
    }

    fn is_pure_mask(&self) -> bool {
        self.kappa == 0.0
    }
}

/// Reduce `x` into `[-d/2, d/2)`.
fn reduce(x: f64, d: f64) -> f64 {
    let r = (x + 0.5 * d).rem_euclid(d) - 0.5 * d;
    if r >= 0.5 * d {
        r - d
    } else {
        r
    }
}

/// Distance from a wall at which the two-wall phase equals `phi_max`.
fn clip_distance(kappa: f64, w: f64, phi_max: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    let half = 0.5 * w;
    if wall_phase(kappa, half, w) >= phi_max {
        return half;
    }
    // φ is decreasing on (0, w/2]; the one-wall estimate already exceeds φ_max.
    let mut lo = (kappa / phi_max).cbrt().min(half);
    let mut hi = half;
    if wall_phase(kappa, lo, w) < phi_max {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if wall_phase(kappa, mid, w) > phi_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `(1/d)∫_p^q exp(−2πimx/d) dx`, stable for small `m (q−p)/d`.
fn exp_segment(m: i64, p: f64, q: f64, d: f64) -> Complex64 {
    let len = q - p;
    if len <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if m == 0 {
        return Complex64::new(len / d, 0.0);
    }
    let theta = 2.0 * PI * m as f64 / d;
    let c = 0.5 * (p + q);
    let half = 0.5 * theta * len;
    Complex64::from_polar(len / d * (half.sin() / half), -theta * c)
}

/// `exp(iπ·k)` with `k` reduced mod 2 first, so integer and half-integer
/// arguments come out exact.
fn unit_phase_pi(k: f64) -> Complex64 {
    let r = k.rem_euclid(2.0);
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if r == 1.0 {
        Complex64::new(-1.0, 0.0)
    } else if r == 0.5 {
        Complex64::new(0.0, 1.0)
    } else if r == 1.5 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::from_polar(1.0, PI * r)
    }
}

/// Autocorrelation coefficients of a grating.
pub trait GratingCoefficients {
    fn period(&self) -> f64;
    /// `B⁰_m = Σ a_ℓ a*_{ℓ−m}`.
    fn b_null(&self, m: i64) -> Result<Complex64, GratingError>;
    /// `B^λ_m = Σ a_ℓ a*_{ℓ−m} exp(iπ(m²−2ℓm)s/2)` with `s = L/L_T`.
    fn b_lambda(&self, m: i64, l_over_lt: f64) -> Result<Complex64, GratingError>;
}

impl GratingCoefficients for TransmissionProfile {
    fn period(&self) -> f64 {
        self.spec.period
    }

    fn b_null(&self, m: i64) -> Result<Complex64, GratingError> {
        let h = self.half_open;
        Ok(exp_segment(m, -h, h, self.spec.period))
    }

    /// Uses `B^λ_m = e^{iπm²s/2} (1/d)∫ t(x−δ) t*(x) e^{−2πimx/d} dx`
    /// with `δ = m s d/2`.
    fn b_lambda(&self, m: i64, l_over_lt: f64) -> Result<Complex64, GratingError> {
        let d = self.spec.period;
        let h = self.half_open;
        if h == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let shift_periods = (m as f64 * l_over_lt * 0.5).rem_euclid(1.0);
        let prefactor = unit_phase_pi((m * m) as f64 * l_over_lt * 0.5);
        let mut total = Complex64::new(0.0, 0.0);
        for k in [-1.0, 0.0] {
            let offset = (shift_periods + k) * d;
            let p = (-h).max(offset - h);
            let q = h.min(offset + h);
            if q <= p {
                continue;
            }
            if self.is_pure_mask() {
                total += exp_segment(m, p, q, d);
                continue;
            }
            let theta = 2.0 * PI * m as f64 / d;
            let integrand = |x: f64| {
                let phase = self.phase_centered(x - offset) - self.phase_centered(x) - theta * x;
                Complex64::from_polar(1.0, phase)
            };
            let mut points = vec![p];
            for b in [0.0, offset] {
                if b > p && b < q {
                    points.push(b);
                }
            }
            points.push(q);
            points.sort_by(f64::total_cmp);
            let est = integrate_with_breaks(integrand, &points, self.tolerance.with_max_intervals(20_000))
                .map_err(|source| GratingError::Overlap { m, source })?;
            total += est.value / d;
        }
        Ok(prefactor * total)
    }
}

/// Truncated Fourier series `a_ℓ`, `ℓ ∈ [−ℓ_max, ℓ_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    pub period: f64,
    pub l_max: usize,
    coefficients: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn from_coefficients(period: f64, coefficients: Vec<Complex64>) -> Result<Self, GratingError> {
        if coefficients.len() < 3 || coefficients.len() % 2 == 0 {
            return Err(GratingError::InvalidCutoff);
        }
        let l_max = (coefficients.len() - 1) / 2;
        Ok(Self {
            period,
            l_max,
            coefficients,
        })
    }

    /// `a_ℓ`, zero outside the stored range.
    pub fn coefficient(&self, l: i64) -> Complex64 {
        let lm = self.l_max as i64;
        if l.abs() > lm {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(l + lm) as usize]
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `Σ|a_ℓ|²` over the stored range.
    pub fn power(&self) -> f64 {
        self.coefficients.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Synthesised `t(x)` from the stored coefficients.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        let lm = self.l_max as i64;
        (-lm..=lm)
            .map(|l| self.coefficient(l) * Complex64::from_polar(1.0, 2.0 * PI * l as f64 * x / self.period))
            .sum()
    }
}

impl GratingCoefficients for FourierSpectrum {
    fn period(&self) -> f64 {
        self.period
    }

    fn b_null(&self, m: i64) -> Result<Complex64, GratingError> {
        let lm = self.l_max as i64;
        let lo = (-lm).max(m - lm);
        let hi = lm.min(m + lm);
        Ok((lo..=hi).map(|l| self.coefficient(l) * self.coefficient(l - m).conj()).sum())
    }

    fn b_lambda(&self, m: i64, l_over_lt: f64) -> Result<Complex64, GratingError> {
        let lm = self.l_max as i64;
        let lo = (-lm).max(m - lm);
        let hi = lm.min(m + lm);
        Ok((lo..=hi)
            .map(|l| {
                let k = (m * m - 2 * l * m) as f64 * l_over_lt * 0.5;
                self.coefficient(l) * self.coefficient(l - m).conj() * unit_phase_pi(k)
            })
            .sum())
    }
}

/// `a_ℓ = (1/d)∫ t(x) exp(−2πiℓx/d) dx` for `|ℓ| ≤ ℓ_max`, by adaptive
/// quadrature over the transmitting region.
pub fn fourier_coefficients(
    spec: &GratingSpec,
    speed: f64,
    options: &GratingOptions,
) -> Result<FourierSpectrum, GratingError> {
    if options.l_max < 1 {
        return Err(GratingError::InvalidCutoff);
    }
    let profile = TransmissionProfile::new(spec, speed, options)?;
    let lm = options.l_max as i64;
    let coefficients = (-lm..=lm)
        .map(|l| profile_coefficient(&profile, l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FourierSpectrum {
        period: spec.period,
        l_max: options.l_max,
        coefficients,
    })
}

fn profile_coefficient(profile: &TransmissionProfile, l: i64) -> Result<Complex64, GratingError> {
    let d = profile.period();
    let Some((p, q)) = profile.open_interval() else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    if profile.is_pure_mask() {
        return Ok(exp_segment(l, p, q, d));
    }
    let theta = 2.0 * PI * l as f64 / d;
    let integrand = |x: f64| Complex64::from_polar(1.0, profile.phase_centered(x) - theta * x);
    let est = integrate_with_breaks(integrand, &[p, 0.0, q], profile.tolerance.with_max_intervals(20_000))
        .map_err(|source| GratingError::Coefficient { l, source })?;
    Ok(est.value / d)
}

/// Scalar overlap `(1/d)∫|t|²`, checked by quadrature; used in tests.
pub fn transmitted_fraction(profile: &TransmissionProfile) -> Result<f64, GratingError> {
    let d = profile.period();
    let mut points = vec![-0.5 * d];
    if let Some((p, q)) = profile.open_interval() {
        points.extend([p, q]);
    }
    points.push(0.5 * d);
    let est = integrate_with_breaks(|x: f64| profile.at(x).norm_sqr(), &points, Tolerance::new(1e-12, 1e-10))
        .map_err(|source| GratingError::Coefficient { l: 0, source })?;
    Ok(est.value / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{AMU, MILLI_ELECTRON_VOLT};
    use proptest::prelude::*;

    const D: f64 = 990e-9;

    fn c3_mev_nm3(x: f64) -> f64 {
        x * MILLI_ELECTRON_VOLT * 1e-27
    }

    fn wall_grating(f: f64, c3: f64) -> GratingSpec {
        GratingSpec::new(D, f, 500e-9, c3).unwrap()
    }

    fn sinc(x: f64) -> f64 {
        if x == 0.0 {
            1.0
        } else {
            x.sin() / x
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GratingSpec::new(D, 0.0, 0.0, 0.0).is_err());
        assert!(GratingSpec::new(D, 1.0, 0.0, 0.0).is_err());
        assert!(GratingSpec::new(-D, 0.5, 0.0, 0.0).is_err());
        assert!(GratingSpec::new(D, 0.5, -1.0, 0.0).is_err());
        assert!(GratingSpec::new(D, 0.5, 0.0, -1.0).is_err());
    }

    #[test]
    fn phase_properties() {
        let spec = wall_grating(0.45, c3_mev_nm3(10.0));
        let w = spec.open_width();
        for i in 1..50 {
            let xi = w * i as f64 / 50.0;
            let a = eikonal_phase(&spec, xi, 150.0).unwrap();
            let b = eikonal_phase(&spec, w - xi, 150.0).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs());
            let fast = eikonal_phase(&spec, xi, 300.0).unwrap();
            assert!((fast - 0.5 * a).abs() <= 1e-12 * a);
        }
        let flat = GratingSpec::binary(D, 0.45).unwrap();
        assert_eq!(eikonal_phase(&flat, 0.3 * w, 100.0).unwrap(), 0.0);
        assert!(matches!(
            eikonal_phase(&spec, 0.0, 100.0),
            Err(GratingError::OutsideSlit { .. })
        ));
        assert!(eikonal_phase(&spec, w * 1.01, 100.0).is_err());
    }

    #[test]
    fn transmission_shape() {
        let opts = GratingOptions::default();
        let binary = TransmissionProfile::new(&GratingSpec::binary(D, 0.45).unwrap(), 150.0, &opts).unwrap();
        assert_eq!(binary.at(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(binary.at(0.3 * D), Complex64::new(0.0, 0.0));
        assert_eq!(binary.at(D), Complex64::new(1.0, 0.0));
        assert!((transmitted_fraction(&binary).unwrap() - 0.45).abs() < 1e-9);

        let wall = TransmissionProfile::new(&wall_grating(0.45, c3_mev_nm3(10.0)), 150.0, &opts).unwrap();
        assert!((wall.at(0.0).norm() - 1.0).abs() < 1e-15);
        let xc = wall.clip_distance();
        assert!(xc > 0.0 && xc < 0.5 * wall.spec.open_width());
        // at the clip boundary the phase equals φ_max
        let xi = xc * (1.0 + 1e-9);
        let phi = eikonal_phase(&wall.spec, xi, 150.0).unwrap();
        assert!((phi - 50.0).abs() < 1e-4);
        assert!(wall.effective_open_fraction() < 0.45);
    }

    #[test]
    fn dark_slit_when_phase_never_drops_below_clip() {
        let spec = GratingSpec::new(D, 0.45, 500e-9, c3_mev_nm3(1e9)).unwrap();
        let p = TransmissionProfile::new(&spec, 100.0, &GratingOptions::default()).unwrap();
        assert!(p.open_interval().is_none());
        assert_eq!(p.b_lambda(2, 0.7).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn binary_first_coefficient() {
        let opts = GratingOptions::default();
        let s = fourier_coefficients(&GratingSpec::binary(D, 0.45).unwrap(), 150.0, &opts).unwrap();
        assert!((s.coefficient(0).re - 0.45).abs() < 1e-15);
        // f·sinc(πf) at f = 0.45
        assert!((s.coefficient(1).re - 0.314_390_963_3).abs() < 1e-9);
        assert!(s.coefficient(1).im.abs() < 1e-15);
        for l in 1..=40 {
            assert!((s.coefficient(-l) - s.coefficient(l).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn binary_autocorrelation_matches_direct_sum() {
        // brute-force autocorrelation of the 0/1 mask on a fine grid
        let f = 0.45;
        let n = 200_000;
        let mask: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64 - 0.5;
                if x.abs() < 0.5 * f {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let brute: f64 = mask
            .iter()
            .enumerate()
            .map(|(i, &t)| t * (2.0 * PI * 2.0 * ((i as f64 + 0.5) / n as f64 - 0.5)).cos())
            .sum::<f64>()
            / n as f64;
        let profile = TransmissionProfile::new(&GratingSpec::binary(D, f).unwrap(), 100.0, &GratingOptions::default())
            .unwrap();
        let b2 = profile.b_null(2).unwrap();
        assert!((b2.re - brute).abs() < 1e-5);
        assert!((b2.re - 0.049_18).abs() < 1e-4);
        assert!((profile.b_null(0).unwrap().re - f).abs() < 1e-15);
        let b3 = profile.b_null(3).unwrap();
        assert!((profile.b_null(-3).unwrap() - b3.conj()).norm() < 1e-15);
    }

    #[test]
    fn b_lambda_identities() {
        let opts = GratingOptions::default();
        let spec = GratingSpec::binary(D, 0.45).unwrap();
        let series = fourier_coefficients(&spec, 100.0, &opts).unwrap();
        let exact = TransmissionProfile::new(&spec, 100.0, &opts).unwrap();
        for route in [&series as &dyn GratingCoefficients, &exact] {
            for m in -6..=6 {
                let b0 = route.b_null(m).unwrap();
                assert!((route.b_lambda(m, 0.0).unwrap() - b0).norm() < 1e-14);
                if m % 2 == 0 {
                    assert!((route.b_lambda(m, 2.0).unwrap() - b0).norm() < 1e-12);
                }
            }
            let b2 = route.b_null(2).unwrap();
            assert!((route.b_lambda(2, 1.0).unwrap() - b2).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_and_series_routes_converge() {
        // a low clip keeps the wall phase gradient resolvable by 400 harmonics
        let opts = GratingOptions {
            l_max: 400,
            phi_max: 2.0,
            ..GratingOptions::default()
        };
        for spec in [GratingSpec::binary(D, 0.45).unwrap(), wall_grating(0.45, c3_mev_nm3(10.0))] {
            let series = fourier_coefficients(&spec, 150.0, &opts).unwrap();
            let exact = TransmissionProfile::new(&spec, 150.0, &opts).unwrap();
            for &s in &[0.37, 0.8, 1.3] {
                let a = series.b_lambda(2, s).unwrap();
                let b = exact.b_lambda(2, s).unwrap();
                assert!((a - b).norm() < 2e-4, "s = {s}: {a} vs {b}");
            }
            let a = series.b_null(1).unwrap();
            let b = exact.b_null(1).unwrap();
            assert!((a - b).norm() < 2e-4);
        }
    }

    #[test]
    fn wall_interaction_reduces_power() {
        let opts = GratingOptions::default();
        let mut last = f64::INFINITY;
        for c3 in [0.0, 1.0, 5.0, 10.0, 40.0] {
            let s = fourier_coefficients(&wall_grating(0.45, c3_mev_nm3(c3)), 120.0, &opts).unwrap();
            let p = s.power();
            assert!(p <= last + 1e-12, "C3 = {c3}: {p} > {last}");
            if c3 > 0.0 {
                assert!(p < 0.45);
            }
            for a in s.coefficients() {
                assert!(a.norm() <= 1.0 + 1e-12);
            }
            last = p;
        }
    }

    #[test]
    fn coefficients_independent_of_cutoff() {
        let spec = wall_grating(0.48, c3_mev_nm3(10.0));
        let a = fourier_coefficients(&spec, 140.0, &GratingOptions::default()).unwrap();
        let b = fourier_coefficients(
            &spec,
            140.0,
            &GratingOptions {
                l_max: 50,
                ..GratingOptions::default()
            },
        )
        .unwrap();
        for l in -40..=40 {
            assert!((a.coefficient(l) - b.coefficient(l)).norm() < 1e-10);
        }
    }

    #[test]
    fn wall_coefficients_are_real() {
        let s = fourier_coefficients(&wall_grating(0.45, c3_mev_nm3(10.0)), 100.0, &GratingOptions::default())
            .unwrap();
        for l in -10..=10 {
            assert!((s.coefficient(-l) - s.coefficient(l)).norm() < 1e-10);
        }
        // the phase is mass independent; the molecule only enters through v
        let _ = 840.0 * AMU;
    }

    proptest! {
        #[test]
        fn binary_matches_sinc(f in 0.05f64..0.95, l in -40i64..=40) {
            let spec = GratingSpec::binary(D, f).unwrap();
            let s = fourier_coefficients(&spec, 100.0, &GratingOptions::default()).unwrap();
            let expect = f * sinc(PI * l as f64 * f);
            prop_assert!((s.coefficient(l) - Complex64::new(expect, 0.0)).norm() < 1e-8);
            prop_assert!(s.power() <= f + 1e-12);
        }

        #[test]
        fn transmission_is_periodic(x in -5e-6f64..5e-6, f in 0.1f64..0.9) {
            let spec = GratingSpec::new(D, f, 500e-9, c3_mev_nm3(10.0)).unwrap();
            let p = TransmissionProfile::new(&spec, 150.0, &GratingOptions::default()).unwrap();
            prop_assert!((p.at(x) - p.at(x + D)).norm() < 1e-9);
            prop_assert!(p.at(x).norm() <= 1.0 + 1e-15);
        }
    }
}
