use proptest::prelude::*;

use tlsim::beamline::{
    acceptance_area, corrected_visibility, draw_samples, BeamlineSpec, CorrectionMode, DeflectionModel,
    MonteCarloOptions, SamplingPlan, SourceDistribution,
};
use tlsim::constants::{AMU, MBAR};
use tlsim::decoherence::{visibility_vs_pressure, DecoherenceModel, GasSpec};
use tlsim::grating::GratingSpec;
use tlsim::scenarios::GasDatabase;
use tlsim::talbot_lau::{Interferometer, VelocityDistribution};

const C70: f64 = 840.0 * AMU;

fn argon() -> GasSpec {
    let db = GasDatabase::builtin();
    db.resolve(db.find("Ar").unwrap(), 300.0).unwrap().0
}

fn interferometer() -> Interferometer {
    let g = GratingSpec::new(990e-9, 0.45, 500e-9, 10.0 * 1.602_176_634e-22 * 1e-27).unwrap();
    Interferometer::new(0.38, g, C70)
}

fn effusive() -> SourceDistribution {
    SourceDistribution::Effusive {
        temperature: 900.0,
        molecule_mass: C70,
    }
}

fn small(deflection: DeflectionModel) -> MonteCarloOptions {
    MonteCarloOptions {
        samples: 40_000,
        deflection,
        ..MonteCarloOptions::default()
    }
}

#[test]
fn attenuation_falls_with_pressure() {
    let spec = BeamlineSpec::for_selected_speed(150.0, 0.38, 50e-6);
    let ps: Vec<f64> = [0.0, 1e-7, 5e-7, 2e-6].iter().map(|p| p * MBAR).collect();
    let c = corrected_visibility(&spec, &effusive(), &interferometer(), &argon(), &ps, &small(DeflectionModel::default()))
        .unwrap();
    assert!((c.points[0].attenuation - 1.0).abs() < 1e-12);
    for w in c.points.windows(2) {
        assert!(w[1].attenuation <= w[0].attenuation);
    }
}

#[test]
fn finite_deflection_transmits_at_least_removal() {
    let spec = BeamlineSpec::for_selected_speed(150.0, 0.38, 50e-6);
    let ps = [1e-6 * MBAR];
    let run = |d| {
        corrected_visibility(&spec, &effusive(), &interferometer(), &argon(), &ps, &small(d))
            .unwrap()
            .points[0]
            .attenuation
    };
    let remove = run(DeflectionModel::RemoveOnCollision);
    let kick = run(DeflectionModel::DiffractionLimited);
    let none = run(DeflectionModel::NoDeflection);
    assert!(remove <= kick && kick <= none, "{remove} {kick} {none}");
}

#[test]
fn monte_carlo_is_deterministic() {
    let spec = BeamlineSpec::for_selected_speed(150.0, 0.38, 50e-6);
    let plan = SamplingPlan::for_spec(&spec, &effusive()).unwrap();
    let a = draw_samples(&spec, &effusive(), &plan, 5000, 11);
    let b = draw_samples(&spec, &effusive(), &plan, 5000, 11);
    assert_eq!(a, b);
    let c = draw_samples(&spec, &effusive(), &plan, 5000, 12);
    assert_ne!(a, c);
}

#[test]
fn monochromatic_analytic_mode_is_the_exponential_law() {
    let v = 150.0;
    let spec = BeamlineSpec::for_selected_speed(v, 0.38, 50e-6);
    let ps: Vec<f64> = [0.0, 3e-8, 5e-7].iter().map(|p| p * MBAR).collect();
    let opts = MonteCarloOptions {
        samples: 20_000,
        mode: CorrectionMode::Analytic,
        ..MonteCarloOptions::default()
    };
    let interf = interferometer();
    let c = corrected_visibility(&spec, &SourceDistribution::Monochromatic { speed: v }, &interf, &argon(), &ps, &opts)
        .unwrap();
    let direct = visibility_vs_pressure(
        &interf,
        &VelocityDistribution::Monochromatic,
        v,
        &argon(),
        &DecoherenceModel::default(),
        &ps,
    )
    .unwrap();
    for (pt, d) in c.points.iter().zip(&direct.curve) {
        assert!((pt.corrected / pt.uncorrected - 1.0).abs() < 1e-12);
        assert!((pt.corrected / d.visibility.first_harmonic - 1.0).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shrinking_an_aperture_never_increases_acceptance(
        v in 60.0f64..400.0,
        which in 0usize..3,
        shrink in 0.05f64..1.0,
    ) {
        let spec = BeamlineSpec::for_selected_speed(150.0, 0.38, 50e-6);
        let mut narrow = spec;
        match which {
            0 => narrow.oven_height *= shrink,
            1 => narrow.delimiter_height *= shrink,
            _ => narrow.detector_waist *= shrink,
        }
        prop_assert!(acceptance_area(&narrow, v) <= acceptance_area(&spec, v) * (1.0 + 1e-12) + 1e-30);
    }
}
