use std::time::Instant;

use comaction::report::default_times;
use comaction::{
    catalog_lookup, commutativity_report, GridSpec, LagrangianSystem, ReportOptions, SystemSpec,
    TimePair, Verdict,
};

fn builtin(name: &str, params: &[(&str, f64)]) -> LagrangianSystem {
    catalog_lookup(&SystemSpec::builtin(name, params)).unwrap().into_continuous().unwrap()
}

#[test]
fn commuting_free_particles() {
    let start = Instant::now();
    let (a, b) = (builtin("free_particle", &[]), builtin("free_particle", &[("mass", 2.0)]));
    let r = commutativity_report(&a, &b, &GridSpec::default(), &default_times(), &ReportOptions::default())
        .unwrap();
    eprintln!("free/free: {:?} {:?}", start.elapsed(), r.summary);
    assert_eq!(r.verdict, Verdict::Commuting);
    assert_eq!(r.points.len(), 50);
    assert_eq!(r.phase_probes.len(), 25);
    let s = &r.summary;
    assert_eq!(s.failed_points, 0);
    assert!(s.max_action_commutator.unwrap() <= 10.0 * s.max_error_estimate.unwrap());
    assert!(s.max_poisson_bracket.unwrap() <= 1e-8);
    assert!(s.max_flow_commutator.unwrap() <= 1e-6);
    assert!(s.max_genhje_residual.unwrap() <= 1e-5);
    assert!(s.max_endpoint_momentum_mismatch.unwrap() <= 1e-5);
    assert!(s.max_junction_jump.unwrap() <= 1e-5);
    assert!(s.max_energy_transport_residual.unwrap() <= 1e-5);
}

#[test]
fn free_particle_and_oscillator_do_not_commute() {
    let start = Instant::now();
    let (a, b) = (builtin("free_particle", &[]), builtin("harmonic", &[]));
    let r = commutativity_report(&a, &b, &GridSpec::default(), &default_times(), &ReportOptions::default())
        .unwrap();
    eprintln!("free/harmonic: {:?} {:?}", start.elapsed(), r.summary);
    assert_eq!(r.verdict, Verdict::NonCommuting);
    assert!(r.summary.max_flow_commutator.unwrap() > 1e-2);
}

#[test]
fn empty_times_rejected() {
    let a = builtin("free_particle", &[]);
    let err = commutativity_report(&a, &a, &GridSpec::default(), &[], &ReportOptions::default()).unwrap_err();
    assert!(matches!(err, comaction::Error::InvalidGrid(_)));
    let _ = TimePair { t1: 1.0, t2: 1.0 };
}
