//! Three-grating Talbot-Lau fringe signals, visibilities and wavelength
//! scans.
//!
//! The detected signal behind the third grating is
//!
//! ```text
//! S(x_s) = Σ_m  B⁰_m(G1)* B⁰_m(G3)* B^λ_{2m}(G2; L/L_T) exp(2πi m x_s / d)
//! ```
//!
//! and the classical (moiré shadow) signal replaces `B^λ_{2m}` by `B⁰_{2m}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{de_broglie_wavelength, speed_for_wavelength};
use crate::grating::{
    FourierSpectrum, GratingCoefficients, GratingError, GratingOptions, GratingSpec, TransmissionProfile,
};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TalbotError {
    #[error(transparent)]
    Grating(#[from] GratingError),
    #[error("fringe signal has non-positive mean level {0:e}")]
    NonPositiveMean(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// `L_T = d²/λ`.
pub fn talbot_length(period: f64, wavelength: f64) -> f64 {
    period * period / wavelength
}

/// Wave behind a single grating after free propagation over `L`, in paraxial
/// approximation. The global phase `e^{ikL}` is kept only through `wavenumber`.
#[derive(Debug, Clone, PartialEq)]
pub struct TalbotField {
    pub wavenumber: f64,
    pub distance: f64,
    pub period: f64,
    coefficients: Vec<Complex64>,
}

impl TalbotField {
    /// Complex transverse profile ψ_L(x), without the global phase.
    pub fn psi(&self, x: f64) -> Complex64 {
        let lm = (self.coefficients.len() / 2) as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex64::from_polar(1.0, 2.0 * PI * (i as i64 - lm) as f64 * x / self.period))
            .sum()
    }

    pub fn intensity(&self, x: f64) -> f64 {
        self.psi(x).norm_sqr()
    }

    /// `(1/d)∫|ψ|²` over one period.
    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Applies `exp(−iπℓ² Lλ/d²)` to every Fourier coefficient.
pub fn single_grating_talbot(spectrum: &FourierSpectrum, wavelength: f64, distance: f64) -> TalbotField {
    let s = distance * wavelength / (spectrum.period * spectrum.period);
    let coefficients = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let l = i as i64 - spectrum.l_max as i64;
            let k = ((l * l) as f64 * s).rem_euclid(2.0);
            a * Complex64::from_polar(1.0, -PI * k)
        })
        .collect();
    TalbotField {
        wavenumber: 2.0 * PI / wavelength,
        distance,
        period: spectrum.period,
        coefficients,
    }
}

/// Real periodic signal stored through its non-negative harmonics
/// `c_0 … c_{m_max}` (`c_{−m} = c_m*`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeSignal {
    pub period: f64,
    pub harmonics: Vec<Complex64>,
}

impl FringeSignal {
    pub fn new(period: f64, harmonics: Vec<Complex64>) -> Self {
        Self { period, harmonics }
    }

    pub fn m_max(&self) -> usize {
        self.harmonics.len().saturating_sub(1)
    }

    /// Mean level `c_0`.
    pub fn mean(&self) -> f64 {
        self.harmonics.first().map_or(0.0, |c| c.re)
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let mut s = self.mean();
        for (m, c) in self.harmonics.iter().enumerate().skip(1) {
            s += 2.0 * (c * Complex64::from_polar(1.0, 2.0 * PI * m as f64 * x / self.period)).re;
        }
        s
    }

    /// `n` equally spaced samples over one period, starting at `x = 0`.
    pub fn samples(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..n).map(|i| self.period * i as f64 / n as f64).collect();
        let ys = xs.iter().map(|&x| self.value_at(x)).collect();
        (xs, ys)
    }

    /// Weighted accumulation used for velocity averaging.
    pub fn add_scaled(&mut self, other: &FringeSignal, weight: f64) {
        if self.harmonics.len() < other.harmonics.len() {
            self.harmonics.resize(other.harmonics.len(), Complex64::new(0.0, 0.0));
        }
        for (a, b) in self.harmonics.iter_mut().zip(&other.harmonics) {
            *a += b * weight;
        }
    }

    pub fn zeros(period: f64, m_max: usize) -> Self {
        Self::new(period, vec![Complex64::new(0.0, 0.0); m_max + 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visibility {
    /// `2|c_1|/c_0`.
    pub first_harmonic: f64,
    /// `(S_max − S_min)/(S_max + S_min)`.
    pub minmax: f64,
    pub mean: f64,
}

/// Both visibility definitions for a fringe signal.
pub fn visibility(signal: &FringeSignal) -> Result<Visibility, TalbotError> {
    let mean = signal.mean();
    if !(mean > 0.0) {
        return Err(TalbotError::NonPositiveMean(mean));
    }
    let first_harmonic = signal.harmonics.get(1).map_or(0.0, |c| 2.0 * c.norm() / mean);
    let (max, min) = extrema(signal);
    Ok(Visibility {
        first_harmonic,
        minmax: (max - min) / (max + min),
        mean,
    })
}

fn extrema(signal: &FringeSignal) -> (f64, f64) {
    if signal.m_max() == 0 {
        return (signal.mean(), signal.mean());
    }
    let n = (32 * signal.m_max()).max(256);
    let (xs, ys) = signal.samples(n);
    let dx = signal.period / n as f64;
    let (imax, _) = ys.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &y)| {
        if y > acc.1 {
            (i, y)
        } else {
            acc
        }
    });
    let (imin, _) = ys.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &y)| {
        if y < acc.1 {
            (i, y)
        } else {
            acc
        }
    });
    let max = golden_section(|x| -signal.value_at(x), xs[imax] - dx, xs[imax] + dx).max(ys[imax]);
    let min = (-golden_section(|x| signal.value_at(x), xs[imin] - dx, xs[imin] + dx)).min(ys[imin]);
    (max, min)
}

/// Minimum value of `f` on `[a, b]` by golden-section search, returned negated
/// for maximisation convenience: returns `-min f`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    -fc.min(fd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Quantum,
    Classical,
}

/// Fringe signal from three gratings at `s = L/L_T`.
pub fn fringe_signal(
    gratings: [&dyn GratingCoefficients; 3],
    l_over_lt: f64,
    m_max: usize,
) -> Result<FringeSignal, TalbotError> {
    build_signal(gratings, SignalKind::Quantum, l_over_lt, m_max)
}

/// Moiré shadow signal (`B^λ_{2m} → B⁰_{2m}`).
pub fn classical_signal(gratings: [&dyn GratingCoefficients; 3], m_max: usize) -> Result<FringeSignal, TalbotError> {
    build_signal(gratings, SignalKind::Classical, 0.0, m_max)
}

fn build_signal(
    gratings: [&dyn GratingCoefficients; 3],
    kind: SignalKind,
    l_over_lt: f64,
    m_max: usize,
) -> Result<FringeSignal, TalbotError> {
    let period = gratings[0].period();
    let mut harmonics = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max as i64 {
        let middle = match kind {
            SignalKind::Quantum => gratings[1].b_lambda(2 * m, l_over_lt)?,
            SignalKind::Classical => gratings[1].b_null(2 * m)?,
        };
        let c = gratings[0].b_null(m)?.conj() * gratings[2].b_null(m)?.conj() * middle;
        harmonics.push(c);
    }
    // c_0 is real by construction; strip rounding residue
    harmonics[0] = Complex64::new(harmonics[0].re, 0.0);
    Ok(FringeSignal { period, harmonics })
}

/// Speed distribution of the molecular beam relative to its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityDistribution {
    Monochromatic,
    /// Gaussian in speed truncated at ±3σ, FWHM given as a fraction of the
    /// mean.
    Gaussian { fwhm_fraction: f64, nodes: usize },
    /// Speeds `mean·r_i` with weights `w_i`.
    Histogram { relative_speeds: Vec<f64>, weights: Vec<f64> },
}

impl VelocityDistribution {
    pub fn gaussian(fwhm_fraction: f64) -> Self {
        Self::Gaussian {
            fwhm_fraction,
            nodes: 40,
        }
    }

    pub fn validate(&self) -> Result<(), TalbotError> {
        match self {
            Self::Monochromatic => Ok(()),
            Self::Gaussian { fwhm_fraction, nodes } => {
                if !(0.0..=0.5).contains(fwhm_fraction) {
                    return Err(TalbotError::InvalidInput(format!(
                        "FWHM fraction must lie in [0, 0.5], got {fwhm_fraction}"
                    )));
                }
                if *nodes == 0 {
                    return Err(TalbotError::InvalidInput("velocity quadrature needs nodes".into()));
                }
                Ok(())
            }
            Self::Histogram {
                relative_speeds,
                weights,
            } => {
                if relative_speeds.is_empty() || relative_speeds.len() != weights.len() {
                    return Err(TalbotError::InvalidInput(
                        "histogram needs equally many speeds and weights".into(),
                    ));
                }
                if relative_speeds.iter().any(|&r| !(r > 0.0)) || weights.iter().any(|&w| !(w >= 0.0)) {
                    return Err(TalbotError::InvalidInput(
                        "histogram speeds must be positive and weights non-negative".into(),
                    ));
                }
                if weights.iter().sum::<f64>() <= 0.0 {
                    return Err(TalbotError::InvalidInput("histogram has zero total weight".into()));
                }
                Ok(())
            }
        }
    }

    /// Quadrature nodes `(speed, weight)` with weights summing to one.
    pub fn nodes(&self, mean_speed: f64) -> Result<Vec<(f64, f64)>, TalbotError> {
        self.validate()?;
        match self {
            Self::Monochromatic => Ok(vec![(mean_speed, 1.0)]),
            Self::Gaussian { fwhm_fraction, nodes } => {
                if *fwhm_fraction == 0.0 {
                    return Ok(vec![(mean_speed, 1.0)]);
                }
                let sigma = fwhm_fraction * mean_speed / (2.0 * (2.0 * 2f64.ln()).sqrt());
                let (t, w) = gauss_legendre(*nodes);
                let mut out: Vec<(f64, f64)> = t
                    .iter()
                    .zip(&w)
                    .map(|(&t, &w)| {
                        let z = 3.0 * t;
                        (mean_speed + sigma * z, w * (-0.5 * z * z).exp())
                    })
                    .collect();
                let total: f64 = out.iter().map(|p| p.1).sum();
                for p in &mut out {
                    p.1 /= total;
                }
                Ok(out)
            }
            Self::Histogram {
                relative_speeds,
                weights,
            } => {
                let total: f64 = weights.iter().sum();
                Ok(relative_speeds
                    .iter()
                    .zip(weights)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(&r, &w)| (mean_speed * r, w / total))
                    .collect())
            }
        }
    }
}

/// Three-grating interferometer for one molecular species.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    pub separation: f64,
    pub gratings: [GratingSpec; 3],
    pub molecule_mass: f64,
    pub options: GratingOptions,
    /// Constant factor on every non-zero harmonic (residual vibrations).
    pub vibration_factor: f64,
    pub m_max: usize,
}

impl Interferometer {
    pub fn new(separation: f64, grating: GratingSpec, molecule_mass: f64) -> Self {
        Self {
            separation,
            gratings: [grating; 3],
            molecule_mass,
            options: GratingOptions::default(),
            vibration_factor: 1.0,
            m_max: 20,
        }
    }

    pub fn validate(&self) -> Result<(), TalbotError> {
        if !(self.separation > 0.0) {
            return Err(TalbotError::InvalidInput(format!(
                "grating separation must be positive, got {}",
                self.separation
            )));
        }
        if !(self.molecule_mass > 0.0) {
            return Err(TalbotError::InvalidInput("molecule mass must be positive".into()));
        }
        let d = self.gratings[0].period;
        for g in &self.gratings {
            g.validate()?;
            if (g.period - d).abs() > 1e-12 * d {
                return Err(TalbotError::InvalidInput("all gratings must share one period".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.vibration_factor) {
            return Err(TalbotError::InvalidInput(format!(
                "vibration factor must lie in [0, 1], got {}",
                self.vibration_factor
            )));
        }
        if self.m_max < 1 {
            return Err(TalbotError::InvalidInput("harmonic cutoff must be at least 1".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.gratings[0].period
    }

    pub fn wavelength(&self, speed: f64) -> f64 {
        de_broglie_wavelength(self.molecule_mass, speed)
    }

    pub fn speed(&self, wavelength: f64) -> f64 {
        speed_for_wavelength(self.molecule_mass, wavelength)
    }

    /// `L/L_T` at molecular speed `speed`.
    pub fn talbot_ratio(&self, speed: f64) -> f64 {
        self.separation / talbot_length(self.period(), self.wavelength(speed))
    }

    /// Signal at a single speed. `harmonic_factor(m)` multiplies harmonic
    /// `m ≥ 1` on top of the vibration factor.
    pub fn signal_at_speed_with<F>(&self, speed: f64, kind: SignalKind, harmonic_factor: F) -> Result<FringeSignal, TalbotError>
    where
        F: Fn(usize) -> f64,
    {
        let profiles = self
            .gratings
            .iter()
            .map(|g| TransmissionProfile::new(g, speed, &self.options))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: [&dyn GratingCoefficients; 3] = [&profiles[0], &profiles[1], &profiles[2]];
        let s = self.talbot_ratio(speed);
        let mut signal = build_signal(refs, kind, s, self.m_max)?;
        for (m, c) in signal.harmonics.iter_mut().enumerate().skip(1) {
            *c *= self.vibration_factor * harmonic_factor(m);
        }
        Ok(signal)
    }

    pub fn signal_at_speed(&self, speed: f64, kind: SignalKind) -> Result<FringeSignal, TalbotError> {
        self.signal_at_speed_with(speed, kind, |_| 1.0)
    }

    /// Velocity-averaged signal. Signals, not visibilities, are averaged.
    pub fn averaged_signal_with<F>(
        &self,
        mean_speed: f64,
        distribution: &VelocityDistribution,
        kind: SignalKind,
        harmonic_factor: F,
    ) -> Result<FringeSignal, TalbotError>
    where
        F: Fn(f64, usize) -> f64,
    {
        self.validate()?;
        let mut total = FringeSignal::zeros(self.period(), self.m_max);
        for (v, w) in distribution.nodes(mean_speed)? {
            let s = self.signal_at_speed_with(v, kind, |m| harmonic_factor(v, m))?;
            total.add_scaled(&s, w);
        }
        Ok(total)
    }

    pub fn averaged_signal(
        &self,
        mean_speed: f64,
        distribution: &VelocityDistribution,
        kind: SignalKind,
    ) -> Result<FringeSignal, TalbotError> {
        self.averaged_signal_with(mean_speed, distribution, kind, |_, _| 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Wavelength at the mean speed.
    pub wavelength: f64,
    pub mean_speed: f64,
    pub quantum: Visibility,
    pub classical: Visibility,
}

/// Visibility versus mean de Broglie wavelength. Grid points are evaluated in
/// parallel and returned in grid order; each point is a pure function of its
/// inputs.
pub fn wavelength_scan(
    interferometer: &Interferometer,
    distribution: &VelocityDistribution,
    wavelengths: &[f64],
) -> Result<Vec<ScanPoint>, TalbotError> {
    interferometer.validate()?;
    distribution.validate()?;
    if wavelengths.iter().any(|&l| !(l > 0.0)) {
        return Err(TalbotError::InvalidInput("wavelengths must be positive".into()));
    }
    wavelengths
        .par_iter()
        .map(|&lambda| {
            let v = interferometer.speed(lambda);
            let q = interferometer.averaged_signal(v, distribution, SignalKind::Quantum)?;
            let c = interferometer.averaged_signal(v, distribution, SignalKind::Classical)?;
            Ok(ScanPoint {
                wavelength: lambda,
                mean_speed: v,
                quantum: visibility(&q)?,
                classical: visibility(&c)?,
            })
        })
        .collect()
}

/// `n` equally spaced points from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![start];
    }
    (0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;
    use crate::grating::{fourier_coefficients, GratingSpec};
    use proptest::prelude::*;

    const D: f64 = 990e-9;

    fn profile(f: f64) -> TransmissionProfile {
        TransmissionProfile::new(&GratingSpec::binary(D, f).unwrap(), 100.0, &GratingOptions::default()).unwrap()
    }

    fn sinc(x: f64) -> f64 {
        if x == 0.0 {
            1.0
        } else {
            x.sin() / x
        }
    }

    #[test]
    fn talbot_lengths() {
        assert!((talbot_length(D, 2.58e-12) - 0.3799).abs() < 1e-4);
        assert!((talbot_length(D, 5.14e-12) - 0.1907).abs() < 1e-4);
        assert!((talbot_length(D, 2.0 * 2.58e-12) - 0.5 * talbot_length(D, 2.58e-12)).abs() < 1e-15);
    }

    #[test]
    fn single_grating_self_imaging() {
        let opts = GratingOptions {
            l_max: 60,
            ..GratingOptions::default()
        };
        let spec = fourier_coefficients(&GratingSpec::binary(D, 0.3).unwrap(), 100.0, &opts).unwrap();
        let lambda = 2.5e-12;
        let lt = talbot_length(D, lambda);
        let zero = single_grating_talbot(&spec, lambda, 0.0);
        let full = single_grating_talbot(&spec, lambda, 2.0 * lt);
        let half = single_grating_talbot(&spec, lambda, lt);
        let quarter = single_grating_talbot(&spec, lambda, 0.37 * lt);
        for i in 0..97 {
            let x = D * i as f64 / 97.0;
            let t = spec.evaluate(x);
            assert!((zero.psi(x) - t).norm() < 1e-12);
            assert!((full.intensity(x) - t.norm_sqr()).abs() < 1e-8);
            assert!((half.intensity(x) - spec.evaluate(x - 0.5 * D).norm_sqr()).abs() < 1e-8);
        }
        assert!((quarter.norm() - zero.norm()).abs() < 1e-8 * zero.norm());
    }

    #[test]
    fn classical_closed_forms() {
        for (f, expect) in [(0.45, 0.1068), (0.48, 0.0364), (0.5, 0.0)] {
            let p = profile(f);
            let s = classical_signal([&p, &p, &p], 20).unwrap();
            let v = visibility(&s).unwrap();
            let closed = 2.0 * (sinc(2.0 * PI * f) * sinc(PI * f).powi(2)).abs();
            assert!((v.first_harmonic - closed).abs() < 1e-12);
            assert!((v.first_harmonic - expect).abs() < 1e-3, "f = {f}: {}", v.first_harmonic);
        }
    }

    #[test]
    fn pure_sinusoid_and_constant() {
        let s = FringeSignal::new(D, vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.0)]);
        let v = visibility(&s).unwrap();
        assert!((v.first_harmonic - 0.4).abs() < 1e-15);
        assert!((v.minmax - 0.4).abs() < 1e-12);
        let c = FringeSignal::new(D, vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(visibility(&c).unwrap().minmax, 0.0);
        let bad = FringeSignal::new(D, vec![Complex64::new(0.0, 0.0)]);
        assert!(matches!(visibility(&bad), Err(TalbotError::NonPositiveMean(_))));
    }

    #[test]
    fn self_imaging_matches_classical() {
        let p = profile(0.45);
        let q = fringe_signal([&p, &p, &p], 2.0, 20).unwrap();
        let c = classical_signal([&p, &p, &p], 20).unwrap();
        for i in 0..200 {
            let x = D * i as f64 / 200.0;
            assert!((q.value_at(x) - c.value_at(x)).abs() < 1e-8);
        }
        let q0 = fringe_signal([&p, &p, &p], 0.0, 20).unwrap();
        for (a, b) in q0.harmonics.iter().zip(&c.harmonics) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn half_open_grating_has_no_first_harmonic() {
        // B⁰_2 vanishes at f = 1/2; B^λ_2 does so only at integer L/L_T
        let p = profile(0.5);
        let c = classical_signal([&p, &p, &p], 20).unwrap();
        assert!(c.harmonics[1].norm() < 1e-15);
        let q = fringe_signal([&p, &p, &p], 1.0, 20).unwrap();
        assert!(q.harmonics[1].norm() < 1e-15);
        let off = fringe_signal([&p, &p, &p], 0.7, 20).unwrap();
        assert!(off.harmonics[1].norm() > 1e-3);
    }

    #[test]
    fn monochromatic_average_is_single_speed() {
        let interf = Interferometer::new(0.38, GratingSpec::binary(D, 0.45).unwrap(), 840.0 * AMU);
        let a = interf.signal_at_speed(150.0, SignalKind::Quantum).unwrap();
        let b = interf
            .averaged_signal(150.0, &VelocityDistribution::gaussian(0.0), SignalKind::Quantum)
            .unwrap();
        assert_eq!(a.harmonics, b.harmonics);
    }

    #[test]
    fn velocity_nodes_are_normalised() {
        let nodes = VelocityDistribution::gaussian(0.17).nodes(120.0).unwrap();
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let mean: f64 = nodes.iter().map(|n| n.0 * n.1).sum();
        assert!((mean - 120.0).abs() < 1e-10);
        assert!(VelocityDistribution::gaussian(0.6).validate().is_err());
    }

    #[test]
    fn vibration_factor_scales_first_harmonic() {
        let mut interf = Interferometer::new(0.38, GratingSpec::binary(D, 0.45).unwrap(), 840.0 * AMU);
        let v1 = visibility(&interf.signal_at_speed(140.0, SignalKind::Quantum).unwrap()).unwrap();
        interf.vibration_factor = 0.7;
        let v2 = visibility(&interf.signal_at_speed(140.0, SignalKind::Quantum).unwrap()).unwrap();
        assert!((v2.first_harmonic - 0.7 * v1.first_harmonic).abs() < 1e-15);
        assert_eq!(v1.mean, v2.mean);
    }

    #[test]
    fn scan_is_deterministic() {
        let interf = Interferometer::new(
            0.38,
            GratingSpec::new(D, 0.45, 500e-9, 1.6e-48).unwrap(),
            840.0 * AMU,
        );
        let grid = linear_grid(2.0e-12, 3.0e-12, 6);
        let a = wavelength_scan(&interf, &VelocityDistribution::gaussian(0.1), &grid).unwrap();
        let b = wavelength_scan(&interf, &VelocityDistribution::gaussian(0.1), &grid).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn signal_is_periodic_and_mean_is_c0(f in 0.1f64..0.9, s in 0.0f64..3.0, x in 0.0f64..1.0) {
            let p = profile(f);
            let sig = fringe_signal([&p, &p, &p], s, 20).unwrap();
            let a = sig.value_at(x * D);
            let b = sig.value_at(x * D + D);
            prop_assert!((a - b).abs() <= 1e-12 * sig.mean().max(1e-30) + 1e-15);
            let (_, ys) = sig.samples(512);
            let avg = ys.iter().sum::<f64>() / 512.0;
            prop_assert!((avg - sig.mean()).abs() < 1e-12);
        }

        #[test]
        fn binary_signal_is_nonnegative(f in 0.1f64..0.9, s in 0.0f64..3.0) {
            let p = profile(f);
            let sig = fringe_signal([&p, &p, &p], s, 20).unwrap();
            let (_, ys) = sig.samples(1024);
            let min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(min >= -1e-6 * sig.mean());
        }

        #[test]
        fn velocity_averaging_never_raises_visibility(lambda in 1.5e-12f64..6.5e-12, fwhm in 0.05f64..0.2) {
            let interf = Interferometer::new(0.38, GratingSpec::binary(D, 0.45).unwrap(), 840.0 * AMU);
            let dist = VelocityDistribution::gaussian(fwhm);
            let v = interf.speed(lambda);
            let wide = visibility(&interf.averaged_signal(v, &dist, SignalKind::Quantum).unwrap()).unwrap();
            let peak = dist
                .nodes(v)
                .unwrap()
                .iter()
                .map(|&(u, _)| visibility(&interf.signal_at_speed(u, SignalKind::Quantum).unwrap()).unwrap().first_harmonic)
                .fold(0.0, f64::max);
            prop_assert!(wide.first_harmonic <= peak + 1e-9);
        }
    }
}
