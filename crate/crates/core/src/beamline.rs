//! Monte Carlo transport through the gravitational velocity selector.
//!
//! Molecules fly on vertical parabolas with constant horizontal speed `v`.
//! The state along the beam axis is `(z, y, θ = dy/dz)`:
//!
//! ```text
//! y(z + Δz) = y + θ Δz − g Δz² / (2 v²),    θ(z + Δz) = θ − g Δz / v²
//! ```
//!
//! A trajectory is detected if it clears the oven aperture, the central
//! height delimiter and the detector window. Background-gas collisions are
//! drawn per flight segment (source → G1, G1 → G3, G3 → detector).
//!
//! Random numbers: sample `i` draws its source coordinates from
//! `ChaCha8(seed)` stream `i` and its collision history from
//! `ChaCha8(seed ⊕ COLLISION_SALT)` stream `i`, always in the same order
//! (three segment uniforms first). Runs that differ only in pressure or
//! aperture size therefore share every random number.

use std::f64::consts::PI;

use log::debug;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{BOLTZMANN, HBAR, STANDARD_GRAVITY};
use crate::decoherence::{
    p0_from_sigma_eff, sigma_eff, CrossSectionMethod, DecoherenceError, GasSpec,
};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::talbot_lau::{Interferometer, SignalKind, TalbotError};

const COLLISION_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamlineError {
    #[error("invalid beamline: {0}")]
    InvalidSpec(String),
    #[error("no trajectory is accepted by the apertures{0}")]
    EmptyAcceptance(String),
    #[error(transparent)]
    Decoherence(#[from] DecoherenceError),
    #[error(transparent)]
    Talbot(#[from] TalbotError),
}

/// Aperture geometry along the beam axis; all positions from the oven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamlineSpec {
    pub oven_height: f64,
    /// Vertical centre of the oven aperture relative to the detector axis.
    pub oven_offset: f64,
    pub delimiter_height: f64,
    pub delimiter_position: f64,
    /// Full height of the detection window.
    pub detector_waist: f64,
    pub detector_position: f64,
    pub first_grating_position: f64,
    pub grating_separation: f64,
    pub gravity: f64,
}

impl BeamlineSpec {
    /// Default geometry with the oven lowered so that the parabola through
    /// the delimiter and detector centres has horizontal speed `speed`.
    pub fn for_selected_speed(speed: f64, grating_separation: f64, delimiter_height: f64) -> Self {
        let mut spec = Self {
            oven_height: 200e-6,
            oven_offset: 0.0,
            delimiter_height,
            delimiter_position: 1.2,
            detector_waist: 10e-6,
            detector_position: 2.2,
            first_grating_position: 1.25,
            grating_separation,
            gravity: STANDARD_GRAVITY,
        };
        spec.oven_offset = spec.offset_for_speed(speed);
        spec
    }

    /// Oven offset selecting `speed`: `−g z_d z_det / (2 v²)`.
    pub fn offset_for_speed(&self, speed: f64) -> f64 {
        -self.gravity * self.delimiter_position * self.detector_position / (2.0 * speed * speed)
    }

    pub fn third_grating_position(&self) -> f64 {
        self.first_grating_position + 2.0 * self.grating_separation
    }

    pub fn validate(&self) -> Result<(), BeamlineError> {
        for (name, v) in [
            ("oven height", self.oven_height),
            ("delimiter height", self.delimiter_height),
            ("detector waist", self.detector_waist),
            ("grating separation", self.grating_separation),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(BeamlineError::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gravity >= 0.0) {
            return Err(BeamlineError::InvalidSpec("gravity must be >= 0".into()));
        }
        let z = [
            0.0,
            self.delimiter_position,
            self.first_grating_position,
            self.third_grating_position(),
            self.detector_position,
        ];
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(BeamlineError::InvalidSpec(format!(
                "positions must increase: oven 0, delimiter {}, G1 {}, G3 {}, detector {}",
                z[1], z[2], z[3], z[4]
            )));
        }
        Ok(())
    }

    /// Flight segments (start, end) before, inside and after the interferometer.
    pub fn segments(&self) -> [(f64, f64); 3] {
        [
            (0.0, self.first_grating_position),
            (self.first_grating_position, self.third_grating_position()),
            (self.third_grating_position(), self.detector_position),
        ]
    }
}

/// Free flight over `dz`; returns `(y, θ)`.
pub fn propagate(y: f64, theta: f64, dz: f64, speed: f64, gravity: f64) -> (f64, f64) {
    let c = gravity / (speed * speed);
    (y + theta * dz - 0.5 * c * dz * dz, theta - c * dz)
}

/// Mechanical energy per unit mass `½v²(1+θ²) + g y`.
pub fn specific_energy(y: f64, theta: f64, speed: f64, gravity: f64) -> f64 {
    0.5 * speed * speed * (1.0 + theta * theta) + gravity * y
}

/// Source speed law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceDistribution {
    /// Effusive beam `∝ v³ exp(−v²/v_o²)`, `v_o = (2 k_B T / M)^{1/2}`.
    Effusive { temperature: f64, molecule_mass: f64 },
    Monochromatic { speed: f64 },
}

impl SourceDistribution {
    fn scale(&self) -> f64 {
        match *self {
            Self::Effusive {
                temperature,
                molecule_mass,
            } => (2.0 * BOLTZMANN * temperature / molecule_mass).sqrt(),
            Self::Monochromatic { speed } => speed,
        }
    }

    /// Normalised speed density (effusive only).
    pub fn density(&self, v: f64) -> f64 {
        match *self {
            Self::Effusive { .. } => {
                let vo = self.scale();
                let x = v / vo;
                2.0 * x.powi(3) * (-x * x).exp() / vo
            }
            Self::Monochromatic { .. } => 0.0,
        }
    }
}

/// Convex polygon clipped by `a·y0 + b·θ ≤ c` (Sutherland–Hodgman).
fn clip(poly: &[(f64, f64)], a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let inside = |p: &(f64, f64)| a * p.0 + b * p.1 <= c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (pin, qin) = (inside(&p), inside(&q));
        if pin {
            out.push(p);
        }
        if pin != qin {
            let fp = a * p.0 + b * p.1 - c;
            let fq = a * q.0 + b * q.1 - c;
            let t = fp / (fp - fq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (x1, y1) = poly[i];
        let (x2, y2) = poly[(i + 1) % n];
        s += x1 * y2 - x2 * y1;
    }
    0.5 * s.abs()
}

/// Collision-free acceptance at speed `v`: area (m·rad) of the set of
/// source heights and slopes that clear every aperture.
pub fn acceptance_area(spec: &BeamlineSpec, speed: f64) -> f64 {
    let c = spec.gravity / (2.0 * speed * speed);
    let y_lo = spec.oven_offset - 0.5 * spec.oven_height;
    let y_hi = spec.oven_offset + 0.5 * spec.oven_height;
    let t_mid = (c * spec.detector_position * spec.detector_position - spec.oven_offset) / spec.detector_position;
    let span = 1.0;
    let mut poly = vec![(y_lo, t_mid - span), (y_hi, t_mid - span), (y_hi, t_mid + span), (y_lo, t_mid + span)];
    for (z, h) in [
        (spec.delimiter_position, 0.5 * spec.delimiter_height),
        (spec.detector_position, 0.5 * spec.detector_waist),
    ] {
        // |y0 + θ z − c z²| ≤ h
        poly = clip(&poly, 1.0, z, h + c * z * z);
        poly = clip(&poly, -1.0, -z, h - c * z * z);
        if poly.is_empty() {
            return 0.0;
        }
    }
    shoelace(&poly)
}

/// Where and how samples are drawn. Runs that are compared with matched
/// seeds must share one plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub speed_range: (f64, f64),
    pub height_range: (f64, f64),
    /// Half width of the slope window around the slope that hits the
    /// detector centre, expressed as a height at the detector.
    pub detector_half_window: f64,
    pub height_strata: usize,
    pub speed_strata: usize,
}

impl SamplingPlan {
    /// Plan covering the collision-free acceptance of `spec` with a 10 %
    /// speed margin and a detector window of `2.5` waists.
    pub fn for_spec(spec: &BeamlineSpec, source: &SourceDistribution) -> Result<Self, BeamlineError> {
        spec.validate()?;
        let speed_range = match *source {
            SourceDistribution::Monochromatic { speed } => {
                if acceptance_area(spec, speed) <= 0.0 {
                    return Err(BeamlineError::EmptyAcceptance(format!(" at {speed} m/s")));
                }
                (speed, speed)
            }
            SourceDistribution::Effusive { .. } => {
                let (lo, hi) = acceptance_support(spec)?;
                (0.9 * lo, 1.1 * hi)
            }
        };
        Ok(Self {
            speed_range,
            height_range: (
                spec.oven_offset - 0.5 * spec.oven_height,
                spec.oven_offset + 0.5 * spec.oven_height,
            ),
            detector_half_window: 2.5 * spec.detector_waist,
            height_strata: 16,
            speed_strata: 64,
        })
    }

    fn strata(&self) -> usize {
        self.height_strata * self.speed_strata
    }

    fn theta_halfwidth(&self, spec: &BeamlineSpec) -> f64 {
        self.detector_half_window / spec.detector_position
    }
}

/// Speed interval on which the collision-free acceptance is non-zero.
pub fn acceptance_support(spec: &BeamlineSpec) -> Result<(f64, f64), BeamlineError> {
    let n = 6000;
    let (vmin, vmax): (f64, f64) = (5.0, 5000.0);
    let mut lo = None;
    let mut hi = None;
    for i in 0..=n {
        let v = vmin * (vmax / vmin).powf(i as f64 / n as f64);
        if acceptance_area(spec, v) > 0.0 {
            lo.get_or_insert(v);
            hi = Some(v);
        }
    }
    match (lo, hi) {
        (Some(a), Some(b)) => {
            let step = (vmax / vmin).powf(1.0 / n as f64);
            Ok((a / step, b * step))
        }
        _ => Err(BeamlineError::EmptyAcceptance(String::new())),
    }
}

/// One Monte Carlo history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub index: u64,
    /// Height and slope at the oven.
    pub height: f64,
    pub slope: f64,
    pub speed: f64,
    pub weight: f64,
    /// `(z, Δθ)` per collision.
    pub collisions: Vec<(f64, f64)>,
    pub collided_inside: bool,
    pub detected: bool,
}

fn source_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn collision_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ COLLISION_SALT);
    rng.set_stream(index);
    rng
}

/// Draws source coordinates for history `index` of `n`.
pub fn draw_source(
    spec: &BeamlineSpec,
    source: &SourceDistribution,
    plan: &SamplingPlan,
    index: u64,
    n: u64,
    seed: u64,
) -> TrajectorySample {
    let mut rng = source_rng(seed, index);
    let uy: f64 = rng.random();
    let uv: f64 = rng.random();
    let ut: f64 = rng.random();
    let stratum = (index % plan.strata() as u64) as usize;
    let sy = stratum % plan.height_strata;
    let sv = stratum / plan.height_strata;
    let (y_lo, y_hi) = plan.height_range;
    let height = y_lo + (y_hi - y_lo) * (sy as f64 + uy) / plan.height_strata as f64;
    let (v_lo, v_hi) = plan.speed_range;
    let speed = v_lo + (v_hi - v_lo) * (sv as f64 + uv) / plan.speed_strata as f64;
    let zd = spec.detector_position;
    let centre = (0.5 * spec.gravity * zd * zd / (speed * speed) - height) / zd;
    let half = plan.theta_halfwidth(spec);
    let slope = centre + half * (2.0 * ut - 1.0);
    let measure = (y_hi - y_lo) * 2.0 * half / n as f64;
    let weight = match source {
        SourceDistribution::Monochromatic { .. } => measure,
        SourceDistribution::Effusive { .. } => measure * (v_hi - v_lo) * source.density(speed),
    };
    TrajectorySample {
        index,
        height,
        slope,
        speed,
        weight,
        collisions: Vec::new(),
        collided_inside: false,
        detected: false,
    }
}

/// Follows the trajectory through the apertures, applying slope kicks at
/// the recorded collision points.
pub fn is_detected(spec: &BeamlineSpec, sample: &TrajectorySample) -> bool {
    let (lo, hi) = (
        spec.oven_offset - 0.5 * spec.oven_height,
        spec.oven_offset + 0.5 * spec.oven_height,
    );
    if sample.height < lo || sample.height > hi {
        return false;
    }
    let mut events: Vec<(f64, f64, bool)> = sample.collisions.iter().map(|&(z, d)| (z, d, false)).collect();
    events.push((spec.delimiter_position, 0.5 * spec.delimiter_height, true));
    events.push((spec.detector_position, 0.5 * spec.detector_waist, true));
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let (mut z, mut y, mut t) = (0.0, sample.height, sample.slope);
    for (ze, value, is_aperture) in events {
        let (yn, tn) = propagate(y, t, ze - z, sample.speed, spec.gravity);
        z = ze;
        y = yn;
        t = tn;
        if is_aperture {
            if y.abs() > value {
                return false;
            }
        } else {
            t += value;
        }
    }
    true
}

/// Speed-bin histogram of detected weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityHistogram {
    pub edges: Vec<f64>,
    pub weights: Vec<f64>,
}

impl VelocityHistogram {
    pub fn new(range: (f64, f64), bins: usize) -> Self {
        let edges = (0..=bins)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / bins as f64)
            .collect();
        Self {
            edges,
            weights: vec![0.0; bins],
        }
    }

    pub fn centres(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin(&self, v: f64) -> Option<usize> {
        let n = self.weights.len();
        let (lo, hi) = (self.edges[0], self.edges[n]);
        if n == 0 || v < lo || v > hi {
            return None;
        }
        if hi == lo {
            return Some(0);
        }
        Some((((v - lo) / (hi - lo) * n as f64) as usize).min(n - 1))
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let c = self.centres();
        c.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>() / self.total()
    }

    /// Full width at half maximum with linear interpolation between bins.
    pub fn fwhm(&self) -> f64 {
        let c = self.centres();
        let (imax, &wmax) = self
            .weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("histogram has bins");
        let half = 0.5 * wmax;
        let mut left = c[0];
        for i in (0..imax).rev() {
            if self.weights[i] < half {
                let t = (half - self.weights[i]) / (self.weights[i + 1] - self.weights[i]);
                left = c[i] + t * (c[i + 1] - c[i]);
                break;
            }
        }
        let mut right = c[c.len() - 1];
        for i in imax + 1..c.len() {
            if self.weights[i] < half {
                let t = (self.weights[i - 1] - half) / (self.weights[i - 1] - self.weights[i]);
                right = c[i - 1] + t * (c[i] - c[i - 1]);
                break;
            }
        }
        right - left
    }
}

/// Collision-free velocity selection.
pub fn select_velocities(
    spec: &BeamlineSpec,
    source: &SourceDistribution,
    plan: &SamplingPlan,
    samples: u64,
    bins: usize,
    seed: u64,
) -> Result<VelocityHistogram, BeamlineError> {
    spec.validate()?;
    if samples == 0 {
        return Err(BeamlineError::InvalidSpec("need at least one sample".into()));
    }
    let hist = (0..samples)
        .into_par_iter()
        .fold(
            || VelocityHistogram::new(plan.speed_range, bins),
            |mut h, i| {
                let s = draw_source(spec, source, plan, i, samples, seed);
                if is_detected(spec, &s) {
                    if let Some(b) = h.bin(s.speed) {
                        h.weights[b] += s.weight;
                    }
                }
                h
            },
        )
        .reduce(|| VelocityHistogram::new(plan.speed_range, bins), merge_hist);
    if hist.total() <= 0.0 {
        return Err(BeamlineError::EmptyAcceptance(format!(" among {samples} samples")));
    }
    Ok(hist)
}

fn merge_hist(mut a: VelocityHistogram, b: VelocityHistogram) -> VelocityHistogram {
    for (x, y) in a.weights.iter_mut().zip(&b.weights) {
        *x += y;
    }
    a
}

/// Collision-free acceptance-weighted speed mass per histogram bin,
/// `∫ ρ(v) A(v) dv`, by quadrature.
pub fn analytic_histogram(
    spec: &BeamlineSpec,
    source: &SourceDistribution,
    range: (f64, f64),
    bins: usize,
) -> Result<VelocityHistogram, BeamlineError> {
    let mut h = VelocityHistogram::new(range, bins);
    for i in 0..bins {
        let (a, b) = (h.edges[i], h.edges[i + 1]);
        let est = integrate_with_breaks(
            |v: f64| source.density(v) * acceptance_area(spec, v),
            &[a, 0.5 * (a + b), b],
            Tolerance::new(0.0, 1e-9).with_max_intervals(2000),
        )
        .map_err(|source| {
            BeamlineError::Decoherence(DecoherenceError::Quadrature {
                context: "acceptance integral".into(),
                source,
            })
        })?;
        h.weights[i] = est.value;
    }
    Ok(h)
}

/// Slope kick per collision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeflectionModel {
    /// Vertical kick `N(0, θ_c)`, `θ_c = ħ / (M v b)`, `b = (σ_eff/π)^{1/2}`.
    #[default]
    DiffractionLimited,
    /// Every collision removes the molecule.
    RemoveOnCollision,
    NoDeflection,
}

/// Gas, pressure and collision law for [`apply_gas_collisions`].
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionSetup {
    pub gas: GasSpec,
    pub pressure: f64,
    pub molecule_mass: f64,
    pub deflection: DeflectionModel,
    pub cross_section: CrossSectionMethod,
    /// Draw collisions between G1 and G3 as well.
    pub sample_inside: bool,
}

/// `σ_eff(v)` on a log grid with log-log interpolation.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    log_v: Vec<f64>,
    log_s: Vec<f64>,
}

impl SigmaTable {
    pub fn new(gas: &GasSpec, range: (f64, f64), method: CrossSectionMethod) -> Result<Self, BeamlineError> {
        let (lo, hi) = (range.0 * 0.95, range.1 * 1.05);
        let n = if hi > lo { 48 } else { 1 };
        let mut log_v = Vec::with_capacity(n);
        let mut log_s = Vec::with_capacity(n);
        for i in 0..n {
            let v = if n == 1 {
                range.0
            } else {
                lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
            };
            log_v.push(v.ln());
            log_s.push(sigma_eff(gas, v, method)?.ln());
        }
        Ok(Self { log_v, log_s })
    }

    pub fn at(&self, v: f64) -> f64 {
        let n = self.log_v.len();
        if n == 1 {
            return self.log_s[0].exp();
        }
        let x = v.ln();
        let i = match self.log_v.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return self.log_s[i].exp(),
            Err(i) => i.clamp(1, n - 1),
        };
        let t = (x - self.log_v[i - 1]) / (self.log_v[i] - self.log_v[i - 1]);
        (self.log_s[i - 1] + t * (self.log_s[i] - self.log_s[i - 1])).exp()
    }
}

/// Poisson variate by inversion of the CDF at `u`.
fn poisson_inverse(mean: f64, u: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let mut k = 0u32;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf && k < 10_000 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p == 0.0 && cdf < u {
            break;
        }
    }
    k
}

fn collide(
    spec: &BeamlineSpec,
    setup: &CollisionSetup,
    sigma: &SigmaTable,
    sample: &mut TrajectorySample,
    seed: u64,
) {
    sample.collisions.clear();
    sample.collided_inside = false;
    let mut rng = collision_rng(seed, sample.index);
    let u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    if setup.pressure <= 0.0 {
        sample.detected = is_detected(spec, sample);
        return;
    }
    let n = setup.gas.number_density(setup.pressure);
    let s = sigma.at(sample.speed);
    let kick = match setup.deflection {
        DeflectionModel::DiffractionLimited => HBAR / (setup.molecule_mass * sample.speed * (s / PI).sqrt()),
        DeflectionModel::RemoveOnCollision => f64::INFINITY,
        DeflectionModel::NoDeflection => 0.0,
    };
    let mut counts = [0u32; 3];
    for (k, (a, b)) in spec.segments().iter().enumerate() {
        if k == 1 && !setup.sample_inside {
            continue;
        }
        counts[k] = poisson_inverse(n * s * (b - a), u[k]);
    }
    for (k, (a, b)) in spec.segments().iter().enumerate() {
        for _ in 0..counts[k] {
            let z = a + (b - a) * rng.random::<f64>();
            let g: f64 = rng.sample(StandardNormal);
            sample.collisions.push((z, g * kick));
        }
    }
    sample.collided_inside = counts[1] > 0;
    sample.detected = if setup.deflection == DeflectionModel::RemoveOnCollision && counts.iter().any(|&c| c > 0) {
        false
    } else {
        is_detected(spec, sample)
    };
}

/// Draws collision histories for existing samples and re-evaluates
/// detection.
pub fn apply_gas_collisions(
    spec: &BeamlineSpec,
    samples: &[TrajectorySample],
    setup: &CollisionSetup,
    seed: u64,
) -> Result<Vec<TrajectorySample>, BeamlineError> {
    spec.validate()?;
    if !(setup.pressure >= 0.0) {
        return Err(BeamlineError::InvalidSpec("pressure must be >= 0".into()));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(s.speed), b.max(s.speed)));
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let sigma = SigmaTable::new(&setup.gas, (lo, hi), setup.cross_section)?;
    Ok(samples
        .par_iter()
        .map(|s| {
            let mut s = s.clone();
            collide(spec, setup, &sigma, &mut s, seed);
            s
        })
        .collect())
}

/// Draws `n` source samples (collision free, detection evaluated).
pub fn draw_samples(
    spec: &BeamlineSpec,
    source: &SourceDistribution,
    plan: &SamplingPlan,
    n: u64,
    seed: u64,
) -> Vec<TrajectorySample> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = draw_source(spec, source, plan, i, n, seed);
            s.detected = is_detected(spec, &s);
            s
        })
        .collect()
}

/// Per-bin detected weights: total and without collisions inside the
/// interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportTally {
    pub total: VelocityHistogram,
    pub coherent: VelocityHistogram,
}

/// Streams `n` histories at one pressure into per-batch tallies.
pub fn transport(
    spec: &BeamlineSpec,
    source: &SourceDistribution,
    plan: &SamplingPlan,
    setup: Option<(&CollisionSetup, &SigmaTable)>,
    n: u64,
    bins: usize,
    batches: usize,
    seed: u64,
) -> Vec<TransportTally> {
    let batches = batches.max(1) as u64;
    let per = n.div_ceil(batches);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut tally = TransportTally {
                total: VelocityHistogram::new(plan.speed_range, bins),
                coherent: VelocityHistogram::new(plan.speed_range, bins),
            };
            for i in b * per..((b + 1) * per).min(n) {
                let mut s = draw_source(spec, source, plan, i, n, seed);
                match setup {
                    Some((c, sigma)) => collide(spec, c, sigma, &mut s, seed),
                    None => s.detected = is_detected(spec, &s),
                }
                if !s.detected {
                    continue;
                }
                if let Some(k) = tally.total.bin(s.speed) {
                    tally.total.weights[k] += s.weight;
                    if !s.collided_inside {
                        tally.coherent.weights[k] += s.weight;
                    }
                }
            }
            tally
        })
        .collect()
}

/// How collisions inside the interferometer enter the corrected curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMode {
    /// Inside collisions are sampled; collided molecules keep contributing
    /// to the mean only if they still reach the detector.
    #[default]
    Sampled,
    /// Only outside collisions are sampled; each speed class keeps its
    /// `exp(−p/p0(v))` fringe factor.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub samples: u64,
    pub bins: usize,
    pub batches: usize,
    pub seed: u64,
    pub mode: CorrectionMode,
    pub deflection: DeflectionModel,
    pub cross_section: CrossSectionMethod,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            samples: 400_000,
            bins: 60,
            batches: 20,
            seed: 20_030_512,
            mode: CorrectionMode::default(),
            deflection: DeflectionModel::default(),
            cross_section: CrossSectionMethod::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedPoint {
    /// Pa
    pub pressure: f64,
    pub corrected: f64,
    /// Batch-means standard error of `corrected`.
    pub corrected_error: f64,
    /// `V(0) exp(−p/p0)` at the mean detected speed.
    pub uncorrected: f64,
    /// Detected flux relative to zero pressure.
    pub attenuation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedCurve {
    pub mean_speed: f64,
    pub fwhm: f64,
    pub p0: f64,
    pub points: Vec<CorrectedPoint>,
}

fn harmonic_table(interferometer: &Interferometer, centres: &[f64]) -> Result<Vec<(f64, Complex64)>, BeamlineError> {
    centres
        .par_iter()
        .map(|&v| {
            let s = interferometer.signal_at_speed(v, SignalKind::Quantum)?;
            Ok((s.mean(), s.harmonics[1]))
        })
        .collect()
}

fn tally_visibility(total: &[f64], coherent: &[f64], table: &[(f64, Complex64)], fringe: &[f64]) -> f64 {
    let mut c0 = 0.0;
    let mut c1 = Complex64::new(0.0, 0.0);
    for i in 0..total.len() {
        c0 += total[i] * table[i].0;
        c1 += table[i].1 * (coherent[i] * fringe[i]);
    }
    if c0 > 0.0 {
        2.0 * c1.norm() / c0
    } else {
        0.0
    }
}

/// Visibility versus pressure including the beamline: detected speed
/// distribution, collision losses outside the interferometer and, in
/// [`CorrectionMode::Sampled`], the fate of molecules that collide inside.
pub fn corrected_visibility(
    spec: &BeamlineSpec,
    source: &SourceDistribution,
    interferometer: &Interferometer,
    gas: &GasSpec,
    pressures: &[f64],
    options: &MonteCarloOptions,
) -> Result<CorrectedCurve, BeamlineError> {
    spec.validate()?;
    interferometer.validate()?;
    if pressures.is_empty() {
        return Err(BeamlineError::InvalidSpec("pressure list is empty".into()));
    }
    let plan = SamplingPlan::for_spec(spec, source)?;
    let bins = if plan.speed_range.0 == plan.speed_range.1 { 1 } else { options.bins };
    let sigma = SigmaTable::new(gas, plan.speed_range, options.cross_section)?;
    let reference = transport(spec, source, &plan, None, options.samples, bins, options.batches, options.seed);
    let ref_total = reference
        .iter()
        .fold(VelocityHistogram::new(plan.speed_range, bins), |a, t| merge_hist(a, t.total.clone()));
    if ref_total.total() <= 0.0 {
        return Err(BeamlineError::EmptyAcceptance(format!(" among {} samples", options.samples)));
    }
    let centres = ref_total.centres();
    let table = harmonic_table(interferometer, &centres)?;
    let mean_speed = ref_total.mean();
    let v0_mean = {
        let s = interferometer.signal_at_speed(mean_speed, SignalKind::Quantum)?;
        2.0 * s.harmonics[1].norm() / s.mean()
    };
    let p0_mean = p0_from_sigma_eff(sigma.at(mean_speed), interferometer.separation, gas.temperature);
    debug!("beamline: mean detected speed {mean_speed:.2} m/s, p0 {p0_mean:.3e} Pa");

    let mut points = Vec::with_capacity(pressures.len());
    for &p in pressures {
        let setup = CollisionSetup {
            gas: gas.clone(),
            pressure: p,
            molecule_mass: interferometer.molecule_mass,
            deflection: options.deflection,
            cross_section: options.cross_section,
            sample_inside: options.mode == CorrectionMode::Sampled,
        };
        let fringe: Vec<f64> = centres
            .iter()
            .map(|&v| match options.mode {
                CorrectionMode::Sampled => 1.0,
                CorrectionMode::Analytic => {
                    (-p / p0_from_sigma_eff(sigma.at(v), interferometer.separation, gas.temperature)).exp()
                }
            })
            .collect();
        let tallies = transport(spec, source, &plan, Some((&setup, &sigma)), options.samples, bins, options.batches, options.seed);
        let per_batch: Vec<f64> = tallies
            .iter()
            .map(|t| tally_visibility(&t.total.weights, &t.coherent.weights, &table, &fringe))
            .collect();
        let merged = tallies.iter().fold(
            (vec![0.0; bins], vec![0.0; bins]),
            |(mut a, mut b), t| {
                for i in 0..bins {
                    a[i] += t.total.weights[i];
                    b[i] += t.coherent.weights[i];
                }
                (a, b)
            },
        );
        let corrected = tally_visibility(&merged.0, &merged.1, &table, &fringe);
        let k = per_batch.len() as f64;
        let mean_b = per_batch.iter().sum::<f64>() / k;
        let var = per_batch.iter().map(|x| (x - mean_b).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        points.push(CorrectedPoint {
            pressure: p,
            corrected,
            corrected_error: (var / k).sqrt(),
            uncorrected: v0_mean * (-p / p0_mean).exp(),
            attenuation: merged.0.iter().sum::<f64>() / ref_total.total(),
        });
    }
    Ok(CorrectedCurve {
        mean_speed,
        fwhm: ref_total.fwhm(),
        p0: p0_mean,
        points,
    })
}

/// Zero-pressure visibility averaged over the analytic detected speed
/// distribution.
pub fn analytic_zero_pressure_visibility(
    spec: &BeamlineSpec,
    source: &SourceDistribution,
    interferometer: &Interferometer,
    bins: usize,
) -> Result<f64, BeamlineError> {
    let plan = SamplingPlan::for_spec(spec, source)?;
    let h = analytic_histogram(spec, source, plan.speed_range, bins)?;
    let table = harmonic_table(interferometer, &h.centres())?;
    Ok(tally_visibility(&h.weights, &h.weights, &table, &vec![1.0; bins]))
}
