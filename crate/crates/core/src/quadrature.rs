//! Adaptive quadrature used throughout the physics modules.
//!
//! Three rules live here:
//!
//! * a globally adaptive 10/21-point Gauss–Kronrod integrator for real or
//!   complex integrands, with user supplied breakpoints;
//! * fixed Gauss–Legendre nodes for smooth averages (velocity spreads);
//! * a Filon–Legendre rule for `∫ h(u) exp(iωu) du` with smooth `h` and
//!   arbitrarily large `ω`, used where the decoherence integrals become
//!   highly oscillatory.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "adaptive quadrature did not converge on [{lower:e}, {upper:e}]: \
         error estimate {error:e} after {intervals} intervals"
    )]
    NotConverged {
        lower: f64,
        upper: f64,
        error: f64,
        intervals: usize,
    },
    #[error("integrand is not finite at x = {x:e}")]
    NonFinite { x: f64 },
}

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Stopping rule: converged when the summed error estimate is below
/// `max(abs, rel * |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }

    pub const fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

// Kronrod abscissae and weights of the 21-point rule, with the embedded
// 10-point Gauss weights (Gauss nodes are the odd entries of XGK).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_758_960,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gauss_kronrod_21<T, F>(f: &F, a: f64, b: f64) -> Result<(T, f64), QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<T, QuadratureError> {
        let v = f(x);
        if v.is_finite_value() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::default();
    for j in 0..10 {
        let dx = half * XGK[j];
        let sum = eval(center - dx)? + eval(center + dx)?;
        kronrod = kronrod + sum * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    Ok((value, error))
}

struct Segment<T> {
    lower: f64,
    upper: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lower.total_cmp(&self.lower))
    }
}

/// Globally adaptive integration over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_with_breaks(f, &[a, b], tol)
}

/// Globally adaptive integration over `points[0]..points[last]`, starting
/// from the subintervals delimited by `points` (must be non-decreasing;
/// repeated points are skipped).
pub fn integrate_with_breaks<T, F>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_segments(points, tol, |a, b| gauss_kronrod_21(&f, a, b))
}

fn integrate_segments<T, R>(
    points: &[f64],
    tol: Tolerance,
    rule: R,
) -> Result<Estimate<T>, QuadratureError>
where
    T: QuadValue,
    R: Fn(f64, f64) -> Result<(T, f64), QuadratureError>,
{
    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Segment<T>> = Vec::new();
    let mut total = T::default();
    let mut total_error = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, error) = rule(a, b)?;
        total = total + value;
        total_error += error;
        heap.push(Segment {
            lower: a,
            upper: b,
            value,
            error,
        });
    }
    let mut intervals = heap.len();
    if intervals == 0 {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
            intervals: 0,
        });
    }

    while total_error > tol.target(total.magnitude()) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lower + worst.upper);
        let width = worst.upper - worst.lower;
        if width <= 8.0 * f64::EPSILON * worst.lower.abs().max(worst.upper.abs()).max(f64::MIN_POSITIVE)
            || mid <= worst.lower
            || mid >= worst.upper
        {
            // cannot be refined further in floating point
            finished.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        if intervals >= tol.max_intervals {
            let lower = points[0];
            let upper = *points.last().unwrap_or(&lower);
            return Err(QuadratureError::NotConverged {
                lower,
                upper,
                error: total_error,
                intervals,
            });
        }
        let (v1, e1) = rule(worst.lower, mid)?;
        let (v2, e2) = rule(mid, worst.upper)?;
        total = total - worst.value + v1 + v2;
        total_error += e1 + e2 - worst.error;
        heap.push(Segment {
            lower: worst.lower,
            upper: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            lower: mid,
            upper: worst.upper,
            value: v2,
            error: e2,
        });
        intervals += 1;
    }

    // Re-sum in a fixed order so the result does not depend on running-sum drift.
    let mut all: Vec<Segment<T>> = heap.into_vec();
    all.extend(finished);
    all.sort_by(|x, y| x.lower.total_cmp(&y.lower));
    let mut value = T::default();
    let mut error = 0.0;
    for s in &all {
        value = value + s.value;
        error += s.error;
    }
    if error > tol.target(value.magnitude()) && error > 1e3 * f64::EPSILON * value.magnitude() {
        let lower = points[0];
        let upper = *points.last().unwrap_or(&lower);
        return Err(QuadratureError::NotConverged {
            lower,
            upper,
            error,
            intervals,
        });
    }
    Ok(Estimate {
        value,
        error,
        intervals,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomials P_0..P_{n-1} at `x`.
fn legendre_table(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n];
    if n > 0 {
        p[0] = 1.0;
    }
    if n > 1 {
        p[1] = x;
    }
    for k in 2..n {
        p[k] = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// Spherical Bessel functions j_0..j_{n-1} at `x >= 0`.
pub fn spherical_bessel_j(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1e-2 {
        // three-term power series, relative error below 1e-14
        let mut double_factorial = 1.0;
        let mut power = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                double_factorial *= (2 * k + 1) as f64;
                power *= x;
            }
            let a = (2 * k + 3) as f64;
            let b = (2 * k + 5) as f64;
            let x2 = x * x;
            *slot = power / double_factorial * (1.0 - x2 / (2.0 * a) + x2 * x2 / (8.0 * a * b));
        }
        return out;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x > n as f64 {
        out[0] = j0;
        if n > 1 {
            out[1] = j1;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = (2 * k + 1) as f64 / x * out[k] - out[k - 1];
        }
        return out;
    }
    // Miller's downward recurrence, normalised against j0 or j1.
    let start = n + 20 + x as usize;
    let mut next = 0.0;
    let mut current = 1e-30;
    let mut scratch = vec![0.0; start + 1];
    scratch[start] = current;
    for k in (1..=start).rev() {
        let prev = (2 * k + 1) as f64 / x * current - next;
        next = current;
        current = prev;
        scratch[k - 1] = current;
        if current.abs() > 1e250 {
            for v in scratch.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            next *= 1e-250;
            current *= 1e-250;
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / scratch[0]
    } else {
        j1 / scratch[1]
    };
    for k in 0..n {
        out[k] = scratch[k] * scale;
    }
    out
}

struct FilonRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // (2k+1) P_k(t_j), row-major by node
    legendre: Vec<Vec<f64>>,
}

impl FilonRule {
    fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let legendre = nodes
            .iter()
            .map(|&t| {
                legendre_table(n, t)
                    .into_iter()
                    .enumerate()
                    .map(|(k, p)| (2 * k + 1) as f64 * p)
                    .collect()
            })
            .collect();
        Self {
            nodes,
            weights,
            legendre,
        }
    }

    /// `∫_a^b h(u) exp(iωu) du` with `h` replaced by its interpolant at the
    /// Legendre nodes.
    fn apply<F: Fn(f64) -> f64>(&self, h: &F, omega: f64, a: f64, b: f64) -> Result<Complex64, QuadratureError> {
        let n = self.nodes.len();
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let w = omega * r;
        let jk = spherical_bessel_j(n, w.abs());
        // i^k j_k(|w|), with j_k(-w) = (-1)^k j_k(w)
        let moments: Vec<Complex64> = jk
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let sign = if w < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                let ik = match k % 4 {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                ik * (sign * j)
            })
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let x = c + r * self.nodes[j];
            let hv = h(x);
            if !hv.is_finite() {
                return Err(QuadratureError::NonFinite { x });
            }
            let weight: Complex64 = self.legendre[j]
                .iter()
                .zip(&moments)
                .map(|(&p, &m)| m * p)
                .sum::<Complex64>()
                * self.weights[j];
            sum += weight * hv;
        }
        Ok(sum * r * Complex64::from_polar(1.0, omega * c))
    }
}

fn filon_rules() -> &'static (FilonRule, FilonRule) {
    static RULES: OnceLock<(FilonRule, FilonRule)> = OnceLock::new();
    RULES.get_or_init(|| (FilonRule::new(10), FilonRule::new(20)))
}

/// Adaptive Filon–Legendre integration of `∫ h(u) exp(iωu) du` over the
/// breakpoints `points`. The cost depends on the smoothness of `h`, not on
/// `ω`.
pub fn integrate_oscillatory<F>(
    h: F,
    omega: f64,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate<Complex64>, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let (low, high) = filon_rules();
    integrate_segments(points, tol, |a, b| {
        let coarse = low.apply(&h, omega, a, b)?;
        let fine = high.apply(&h, omega, a, b)?;
        Ok((fine, (fine - coarse).norm()))
    })
}
