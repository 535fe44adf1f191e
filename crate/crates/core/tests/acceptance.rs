//! Acceptance checks, one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use tlsim::beamline::{
    analytic_zero_pressure_visibility, apply_gas_collisions, corrected_visibility, draw_samples, BeamlineSpec,
    CollisionSetup, CorrectionMode, DeflectionModel, MonteCarloOptions, SamplingPlan, SourceDistribution,
};
use tlsim::constants::{AMU, BOLTZMANN, MBAR};
use tlsim::decoherence::{
    collision_path_integral, decoherence_function, mass_scaling_exponent, p0_from_sigma_eff, sigma_eff,
    sigma_eff_asymptotic, sigma_eff_from_p0, sigma_eff_numeric, visibility_vs_pressure, CrossSectionMethod,
    DecoherenceModel, GasSpec, ScatteringModel, ZIntegral,
};
use tlsim::grating::{GratingOptions, GratingSpec, TransmissionProfile};
use tlsim::scenarios::{log_linear_fit, run_builtin, GasDatabase};
use tlsim::talbot_lau::{
    classical_signal, fringe_signal, linear_grid, visibility, wavelength_scan, Interferometer,
    VelocityDistribution,
};

const D: f64 = 990e-9;
const C70: f64 = 840.0 * AMU;
const MEV_NM3: f64 = 1.602_176_634e-22 * 1e-27;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: &str, title: &str, t: Instant, r: Result<Outcome, String>) -> bool {
    let secs = t.elapsed().as_secs_f64();
    match r {
        Ok(o) => {
            println!("[{}] {id} {title}: {} ({secs:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            o.pass
        }
        Err(e) => {
            println!("[FAIL] {id} {title}: error: {e} ({secs:.1} s)");
            false
        }
    }
}

fn db_gas(name: &str) -> Result<GasSpec, String> {
    let db = GasDatabase::builtin();
    let e = db.find(name).ok_or(format!("no gas {name}"))?;
    Ok(db.resolve(e, 300.0).map_err(|e| e.to_string())?.0)
}

/// Largest entry of `ys` on `lo <= x <= hi`.
fn window_argmax(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> f64 {
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for (&x, &y) in xs.iter().zip(ys) {
        if x >= lo && x <= hi && y > best.1 {
            best = (x, y);
        }
    }
    best.0
}

// ---------------------------------------------------------------------------
// 1

fn c1() -> Result<Outcome, String> {
    let step = 0.05e-12;
    let grid = linear_grid(1.0e-12, 7.0e-12, 121);
    let peaks = |c3: f64| -> Result<(f64, f64), String> {
        let g = GratingSpec::new(D, 0.45, 500e-9, c3).map_err(|e| e.to_string())?;
        let interf = Interferometer::new(0.38, g, C70);
        let scan = wavelength_scan(&interf, &VelocityDistribution::Monochromatic, &grid).map_err(|e| e.to_string())?;
        let ys: Vec<f64> = scan.iter().map(|p| p.quantum.first_harmonic).collect();
        Ok((
            window_argmax(&grid, &ys, 1.8e-12, 3.85e-12),
            window_argmax(&grid, &ys, 3.85e-12, 6.5e-12),
        ))
    };
    let (a0, b0) = peaks(0.0)?;
    let near = (a0 - 2.58e-12).abs() <= step + 1e-18 && (b0 - 5.14e-12).abs() <= step + 1e-18;
    let c3s = [5.0, 10.0, 20.0];
    let mut with = Vec::new();
    for c in c3s {
        with.push(peaks(c * MEV_NM3)?);
    }
    let shift_from_zero = with[0].0 < a0 && with[0].1 < b0;
    let monotone = with.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1);
    let pm = |x: f64| x * 1e12;
    Ok(Outcome {
        pass: near && shift_from_zero && monotone,
        detail: format!(
            "C3=0 argmax {:.2}/{:.2} pm (target 2.58/5.14 ± 0.05) [{}]; C3 = 5,10,20 meV nm3 argmax {} [shift below C3=0: {}, strictly decreasing: {}]",
            pm(a0),
            pm(b0),
            if near { "ok" } else { "miss" },
            with.iter().map(|(a, b)| format!("{:.2}/{:.2}", pm(*a), pm(*b))).collect::<Vec<_>>().join(", "),
            shift_from_zero,
            monotone
        ),
    })
}

// ---------------------------------------------------------------------------
// 2

/// Ray-optics shadow signal of three binary masks spaced by `L`, evaluated
/// by integrating the G1/G3 overlap length over the open part of G2.
fn moire_signal(f: f64, xs: f64) -> f64 {
    let d = 1.0;
    let h = 0.5 * f * d;
    // |[-h, h] ∩ ([c-h, c+h] + k d)| summed over k
    let overlap = |c: f64| -> f64 {
        let c = c - d * (c / d).round();
        [-1.0, 0.0, 1.0]
            .iter()
            .map(|k| {
                let lo = (-h).max(c + k * d - h);
                let hi = h.min(c + k * d + h);
                (hi - lo).max(0.0)
            })
            .sum()
    };
    let n = 4000;
    let mut s = 0.0;
    for i in 0..n {
        let x2 = -h + 2.0 * h * (i as f64 + 0.5) / n as f64;
        s += overlap(2.0 * x2 - xs);
    }
    s * 2.0 * h / n as f64 / (d * d)
}

fn moire_visibilities(f: f64) -> (f64, f64) {
    let n = 512;
    let ys: Vec<f64> = (0..n).map(|i| moire_signal(f, i as f64 / n as f64)).collect();
    let c0 = ys.iter().sum::<f64>() / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let a = 2.0 * PI * i as f64 / n as f64;
        re += y * a.cos();
        im -= y * a.sin();
    }
    let c1 = (re * re + im * im).sqrt() / n as f64;
    let max = ys.iter().cloned().fold(f64::MIN, f64::max);
    let min = ys.iter().cloned().fold(f64::MAX, f64::min);
    (2.0 * c1 / c0, (max - min) / (max + min))
}

fn c2() -> Result<Outcome, String> {
    let tol = 1e-3;
    let mut ok = true;
    let mut parts = Vec::new();
    for (f, closed) in [(0.45, 0.1068), (0.48, 0.0364)] {
        let spec = GratingSpec::binary(D, f).map_err(|e| e.to_string())?;
        let t = TransmissionProfile::new(&spec, 200.0, &GratingOptions::default()).map_err(|e| e.to_string())?;
        let v = visibility(&classical_signal([&t, &t, &t], 20).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let (m1, mmm) = moire_visibilities(f);
        let good = (v.first_harmonic - closed).abs() <= tol
            && (v.first_harmonic - m1).abs() <= tol
            && (v.minmax - mmm).abs() <= tol;
        ok &= good;
        parts.push(format!(
            "f={f}: h1 {:.5} (closed {closed}, moire {:.5}), min-max {:.5} (moire {:.5})",
            v.first_harmonic, m1, v.minmax, mmm
        ));
    }
    // quantum above classical near the first recurrence with C3 > 0
    let g = GratingSpec::new(D, 0.45, 500e-9, 10.0 * MEV_NM3).map_err(|e| e.to_string())?;
    let interf = Interferometer::new(0.38, g, C70);
    let grid = linear_grid(2.2e-12, 2.9e-12, 15);
    let scan = wavelength_scan(&interf, &VelocityDistribution::Monochromatic, &grid).map_err(|e| e.to_string())?;
    let best = scan
        .iter()
        .max_by(|a, b| a.quantum.first_harmonic.total_cmp(&b.quantum.first_harmonic))
        .ok_or("empty scan")?;
    let above = best.quantum.first_harmonic > best.classical.first_harmonic;
    ok &= above;
    parts.push(format!(
        "C3>0 near 2.58 pm: quantum {:.4} vs classical {:.4} at {:.2} pm",
        best.quantum.first_harmonic,
        best.classical.first_harmonic,
        best.wavelength * 1e12
    ));
    Ok(Outcome {
        pass: ok,
        detail: parts.join("; "),
    })
}

// ---------------------------------------------------------------------------
// 3

fn c3() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for f in [0.3, 0.45, 0.48] {
        let spec = GratingSpec::binary(D, f).map_err(|e| e.to_string())?;
        let t = TransmissionProfile::new(&spec, 150.0, &GratingOptions::default()).map_err(|e| e.to_string())?;
        let q = fringe_signal([&t, &t, &t], 2.0, 20).map_err(|e| e.to_string())?;
        let c = classical_signal([&t, &t, &t], 20).map_err(|e| e.to_string())?;
        let (_, yq) = q.samples(128);
        let (_, yc) = c.samples(128);
        for (a, b) in yq.iter().zip(&yc) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8,
        detail: format!("max |S_q - S_cl| at L = 2 L_T: {worst:.2e} (tol 1e-8)"),
    })
}

// ---------------------------------------------------------------------------
// 4

fn c4() -> Result<Outcome, String> {
    let report = run_builtin("fig4", None).map_err(|e| e.to_string())?;
    let rows = report.series("averaged");
    let ps: Vec<f64> = rows.iter().map(|r| r.coordinate).collect();
    let vs: Vec<f64> = rows.iter().map(|r| r.visibility_h1.unwrap_or(f64::NAN)).collect();
    let (slope, _, resid) = log_linear_fit(&ps, &vs);
    let p0 = rows[0].p0.ok_or("no p0")?;
    let sigma = rows[0].sigma_eff.ok_or("no sigma")?;
    let fit_rel = (-1.0 / slope / p0 - 1.0).abs();
    let identity = BOLTZMANN * 300.0 / (2.0 * 0.22 * sigma);
    let id_rel = (p0 / identity - 1.0).abs();
    let mut worst_id: f64 = 0.0;
    for s in [1e-18, 7.97e-17, 3.6e-14] {
        for l in [0.22, 0.38, 1.0] {
            let p = p0_from_sigma_eff(s, l, 300.0);
            worst_id = worst_id.max((p / (BOLTZMANN * 300.0 / (2.0 * l * s)) - 1.0).abs());
            worst_id = worst_id.max((sigma_eff_from_p0(p, l, 300.0) / s - 1.0).abs());
        }
    }
    Ok(Outcome {
        pass: resid < 1e-10 && fit_rel < 1e-9 && id_rel <= 1e-12 && worst_id <= 1e-12,
        detail: format!(
            "ln V residual {resid:.1e} (tol 1e-10), fitted/identity p0 - 1 = {fit_rel:.1e}, p0 identity rel {:.1e} (tol 1e-12)",
            id_rel.max(worst_id)
        ),
    })
}

// ---------------------------------------------------------------------------
// 5

fn c5() -> Result<Outcome, String> {
    let (l, v, t) = (0.22, 117.0, 300.0);
    let p0 = 11.8e-7 * MBAR;
    let sigma = sigma_eff_from_p0(p0, l, t);
    let back = p0_from_sigma_eff(sigma, l, t);
    let sig_ok = (sigma / 79.7e-18 - 1.0).abs() <= 0.01;
    let rt_ok = (back / p0 - 1.0).abs() <= 1e-6;
    let db = GasDatabase::builtin();
    let mut worst: (f64, String) = (0.0, String::new());
    for name in ["H2", "D2", "He", "CH4", "Ne", "N2", "Air", "Ar", "Kr", "Xe"] {
        let e = db.find(name).ok_or("missing gas")?;
        let (gas, _) = db.resolve(e, t).map_err(|e| e.to_string())?;
        let p = p0_from_sigma_eff(sigma_eff(&gas, v, CrossSectionMethod::Numeric).map_err(|e| e.to_string())?, l, t);
        let dev = (p / e.p0_theory.ok_or("no theory p0")? - 1.0).abs();
        if dev > worst.0 {
            worst = (dev, name.to_string());
        }
    }
    Ok(Outcome {
        pass: sig_ok && rt_ok && worst.0 <= 0.10,
        detail: format!(
            "Ar sigma_eff {:.2} nm2 (79.7 ± 1%), round trip rel {:.1e} (tol 1e-6); theory-row worst deviation {:.2}% ({}) (tol 10%; C6 inverted from the tabulated theory p0, numeric cross section forward)",
            sigma * 1e18,
            (back / p0 - 1.0).abs(),
            worst.0 * 100.0,
            worst.1
        ),
    })
}

// ---------------------------------------------------------------------------
// 6

fn c6() -> Result<Outcome, String> {
    let report = run_builtin("table2", None).map_err(|e| e.to_string())?;
    let mut arith: f64 = 0.0;
    let mut sk_ratio: (f64, f64) = (f64::INFINITY, 0.0);
    for r in &report.rows {
        let rp = r.reference_p0.ok_or("no reference p0")?;
        let rs = r.reference_sigma_eff.ok_or("no reference sigma")?;
        if r.series.ends_with(":tabulated_sigma") {
            arith = arith.max((r.p0.ok_or("no p0")? / rp - 1.0).abs());
        } else {
            let q = r.sigma_eff.ok_or("no sigma")? / rs;
            sk_ratio = (sk_ratio.0.min(q), sk_ratio.1.max(q));
        }
    }
    Ok(Outcome {
        pass: arith <= 0.15 && sk_ratio.0 >= 0.5 && sk_ratio.1 <= 2.0,
        detail: format!(
            "p0 from tabulated sigma_eff worst deviation {:.1}% (tol 15%); Slater-Kirkwood/tabulated sigma_eff in [{:.2}, {:.2}] (tol [0.5, 2])",
            arith * 100.0,
            sk_ratio.0,
            sk_ratio.1
        ),
    })
}

// ---------------------------------------------------------------------------
// 7

fn c7() -> Result<Outcome, String> {
    let db = GasDatabase::builtin();
    let mut worst: f64 = 0.0;
    for e in &db.gases {
        let (gas, _) = db.resolve(e, 300.0).map_err(|e| e.to_string())?;
        let vstar = gas.most_probable_speed();
        for u in [0.05, 0.1, 0.2, 0.3] {
            let a = sigma_eff_asymptotic(&gas, u * vstar).map_err(|e| e.to_string())?;
            let n = sigma_eff_numeric(&gas, u * vstar).map_err(|e| e.to_string())?;
            worst = worst.max((a / n - 1.0).abs());
        }
    }
    let masses: Vec<f64> = db.gases.iter().map(|g| g.mass).collect();
    let k = 6.0e-76 / (39.9 * AMU);
    let slope = mass_scaling_exponent(&masses, |m| k * m, 300.0, 117.0, CrossSectionMethod::Asymptotic)
        .map_err(|e| e.to_string())?;
    Ok(Outcome {
        pass: worst <= 0.01 && (slope - 0.10).abs() <= 0.02,
        detail: format!(
            "numeric vs asymptotic worst {:.3}% for u <= 0.3 (tol 1%); mass exponent {slope:.4} (0.10 ± 0.02)",
            worst * 100.0
        ),
    })
}

// ---------------------------------------------------------------------------
// 8

fn c8() -> Result<Outcome, String> {
    let db = GasDatabase::builtin();
    let model = ScatteringModel::Isotropic;
    let mut eta0: f64 = 0.0;
    let mut far: f64 = 0.0;
    let mut closed: f64 = 0.0;
    let mut path: f64 = 0.0;
    let full = DecoherenceModel {
        z_integral: ZIntegral::Full,
        ..DecoherenceModel::default()
    };
    for e in &db.gases {
        let (gas, _) = db.resolve(e, 300.0).map_err(|e| e.to_string())?;
        eta0 = eta0.max((decoherence_function(&gas, model, 0.0).map_err(|e| e.to_string())? - 1.0).abs());
        far = far.max(decoherence_function(&gas, model, 10e-6).map_err(|e| e.to_string())?.abs());
        let v = 300.0;
        for dr in [1e-13, 1e-12, 1e-11, 1e-10] {
            let a = 2.0 * gas.mass * v * dr / tlsim::constants::HBAR;
            let num = tlsim::decoherence::decoherence_function_monochromatic(&gas, model, v, dr)
                .map_err(|e| e.to_string())?;
            closed = closed.max((num - 2.0 * (1.0 - a.cos()) / (a * a)).abs());
        }
        let z = collision_path_integral(1, &gas, &full, 0.38, D, 2.58e-12).map_err(|e| e.to_string())?;
        path = path.max((z / (2.0 * 0.38) - 1.0).abs());
    }
    Ok(Outcome {
        pass: eta0 <= 1e-9 && closed <= 1e-6 && far < 1e-3 && path <= 0.005,
        detail: format!(
            "|eta(0)-1| {eta0:.1e} (1e-9), closed form {closed:.1e} (1e-6), max |eta(10 um)| {far:.1e} (1e-3), full z-integral vs 2L {:.3}% (0.5%) over {} gases",
            path * 100.0,
            db.gases.len()
        ),
    })
}

// ---------------------------------------------------------------------------
// 9

fn c9() -> Result<Outcome, String> {
    let ar = db_gas("Ar")?;
    let (lo, hi) = (3e-8 * MBAR, 5e-7 * MBAR);
    let l = 0.38;
    let ratio = |v: f64| -> Result<f64, String> {
        let p0 = p0_from_sigma_eff(sigma_eff(&ar, v, CrossSectionMethod::Numeric).map_err(|e| e.to_string())?, l, 300.0);
        Ok((-(hi - lo) / p0).exp())
    };
    let r100 = ratio(100.0)?;
    let r190 = ratio(190.0)?;
    // cross-check the closed ratio against the full signal route
    let g = GratingSpec::new(D, 0.45, 500e-9, 10.0 * MEV_NM3).map_err(|e| e.to_string())?;
    let interf = Interferometer::new(l, g, C70);
    let curve = visibility_vs_pressure(
        &interf,
        &VelocityDistribution::Monochromatic,
        190.0,
        &ar,
        &DecoherenceModel::default(),
        &[lo, hi],
    )
    .map_err(|e| e.to_string())?;
    let r190_signal = curve.curve[1].visibility.first_harmonic / curve.curve[0].visibility.first_harmonic;

    let spec = BeamlineSpec::for_selected_speed(190.0, l, 150e-6);
    let source = SourceDistribution::Effusive {
        temperature: 900.0,
        molecule_mass: C70,
    };
    let opts = MonteCarloOptions {
        samples: 400_000,
        ..MonteCarloOptions::default()
    };
    let c = corrected_visibility(&spec, &source, &interf, &ar, &[lo, hi], &opts).map_err(|e| e.to_string())?;
    let rc = c.points[1].corrected / c.points[0].corrected;
    let pass = (r100 - 0.45).abs() <= 0.05
        && (0.60..=0.70).contains(&r190)
        && (r190_signal / r190 - 1.0).abs() < 1e-9
        && rc > r190;
    Ok(Outcome {
        pass,
        detail: format!(
            "uncorrected V(5e-7)/V(3e-8): {r100:.3} at 100 m/s (0.45 ± 0.05, reference 0.5), {r190:.3} at 190 m/s (0.60-0.70, reference 0.8); corrected at 190 m/s {rc:.3} (must exceed {r190:.3}; residual gap to 0.8: {:+.3}; detected mean {:.0} m/s, FWHM {:.0} m/s)",
            rc - 0.8,
            c.mean_speed,
            c.fwhm
        ),
    })
}

// ---------------------------------------------------------------------------
// 10

fn c10() -> Result<Outcome, String> {
    let ar = db_gas("Ar")?;
    let g = GratingSpec::new(D, 0.45, 500e-9, 10.0 * MEV_NM3).map_err(|e| e.to_string())?;
    let interf = Interferometer::new(0.38, g, C70);
    let spec = BeamlineSpec::for_selected_speed(150.0, 0.38, 50e-6);
    let source = SourceDistribution::Effusive {
        temperature: 900.0,
        molecule_mass: C70,
    };
    let opts = MonteCarloOptions {
        samples: 1_000_000,
        mode: CorrectionMode::Sampled,
        ..MonteCarloOptions::default()
    };
    let c = corrected_visibility(&spec, &source, &interf, &ar, &[0.0], &opts).map_err(|e| e.to_string())?;
    let analytic = analytic_zero_pressure_visibility(&spec, &source, &interf, opts.bins).map_err(|e| e.to_string())?;
    let z = (c.points[0].corrected - analytic).abs() / c.points[0].corrected_error;

    // Beer's law with every collision removing the molecule
    let v = 150.0;
    let mono = SourceDistribution::Monochromatic { speed: v };
    let plan = SamplingPlan::for_spec(&spec, &mono).map_err(|e| e.to_string())?;
    let samples = draw_samples(&spec, &mono, &plan, 1_000_000, 5);
    let n0 = samples.iter().filter(|s| s.detected).count() as f64;
    let pressure = 2e-6 * MBAR;
    let setup = CollisionSetup {
        gas: ar.clone(),
        pressure,
        molecule_mass: C70,
        deflection: DeflectionModel::RemoveOnCollision,
        cross_section: CrossSectionMethod::Numeric,
        sample_inside: true,
    };
    let after = apply_gas_collisions(&spec, &samples, &setup, 5).map_err(|e| e.to_string())?;
    let n1 = after.iter().filter(|s| s.detected).count() as f64;
    let sigma = sigma_eff(&ar, v, CrossSectionMethod::Numeric).map_err(|e| e.to_string())?;
    let expect = (-ar.number_density(pressure) * sigma * spec.detector_position).exp();
    let binom = (expect * (1.0 - expect) / n0).sqrt();
    let zb = (n1 / n0 - expect).abs() / binom;
    Ok(Outcome {
        pass: z <= 3.0 && zb <= 3.0,
        detail: format!(
            "zero pressure (seed {}): MC {:.5} ± {:.5} vs analytic {analytic:.5} ({z:.2} SE, tol 3); Beer: {:.5} vs exp(-n sigma l) {expect:.5} ({zb:.2} sigma, tol 3, {n0} detected)",
            opts.seed,
            c.points[0].corrected,
            c.points[0].corrected_error,
            n1 / n0
        ),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Result<Outcome, String>); 10] = [
        ("C1", "Talbot recurrence", c1),
        ("C2", "quantum vs classical", c2),
        ("C3", "self-imaging identity", c3),
        ("C4", "exponential decay", c4),
        ("C5", "gas table round trip", c5),
        ("C6", "candidate table", c6),
        ("C7", "sigma_eff consistency", c7),
        ("C8", "decoherence function", c8),
        ("C9", "pressure ratios", c9),
        ("C10", "Monte Carlo beamline", c10),
    ];
    let mut failed = 0;
    for (id, title, f) in criteria {
        let t = Instant::now();
        if !report(id, title, t, f()) {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
