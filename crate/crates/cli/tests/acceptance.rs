//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use comaction::trajectories::ActionOptions;
use comaction::{
    action_commutator, catalog, catalog_lookup, check_nondegeneracy, discrete_action_commutator,
    discrete_commutativity_report, discrete_composed_action, discrete_map, flow_commutator,
    hamiltonian_of, hj_check, map_commutator, minimize_action, momentum_of_velocity, poisson_bracket,
    principal_action, richardson_action, symplecticity_check, velocity_of_momentum, DiscreteLagrangian, DiscreteOptions,
    GridSpec, LagrangianSystem, LegendrePair, Order, System, SystemSpec,
};
use comaction::legendre::default_velocity_guess;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

// Closed-form and mpmath oracle values, frozen before the build.
const HARMONIC_ACTION_0_1_1: f64 = 0.321046307967165;
const FREE_HARMONIC_COMMUTATOR: f64 = -0.304489524615215;
const FREE_HARMONIC_FLOW_COMMUTATOR: f64 = 0.239712769302102;
const QUAD_KICKED_COMMUTATOR: f64 = -0.0952425511756886;

struct Check {
    label: String,
    ok: bool,
}

/// Measurements for one criterion; each `check` is one pinned tolerance.
#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn at_most(&mut self, what: &str, value: f64, tol: f64) {
        self.checks.push(Check {
            label: format!("{what} = {value:.3e} <= {tol:.0e}"),
            ok: value <= tol,
        });
    }

    fn at_least(&mut self, what: &str, value: f64, bound: f64) {
        self.checks.push(Check {
            label: format!("{what} = {value:.3e} > {bound:.0e}"),
            ok: value > bound,
        });
    }

    fn near(&mut self, what: &str, value: f64, expected: f64, tol: f64) {
        self.checks.push(Check {
            label: format!("{what} = {value:.12} vs {expected:.12} (tol {tol:.0e})"),
            ok: (value - expected).abs() <= tol,
        });
    }

    fn holds(&mut self, what: &str, ok: bool) {
        self.checks.push(Check { label: what.to_string(), ok });
    }
}

type Body = fn(&mut Criterion) -> Result<(), String>;

fn builtin(name: &str, params: &[(&str, f64)]) -> LagrangianSystem {
    catalog_lookup(&SystemSpec::builtin(name, params)).unwrap().into_continuous().unwrap()
}

fn discrete(name: &str, params: &[(&str, f64)]) -> DiscreteLagrangian {
    catalog_lookup(&SystemSpec::builtin(name, params)).unwrap().into_discrete().unwrap()
}

fn oscillator_action(qa: f64, qb: f64, t: f64) -> f64 {
    ((qa * qa + qb * qb) * t.cos() - 2.0 * qa * qb) / (2.0 * t.sin())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn principal_action_accuracy(c: &mut Criterion) -> Result<(), String> {
    let opts = ActionOptions::default();
    let start = Instant::now();
    let free = principal_action(&builtin("free_particle", &[("mass", 1.0)]), &[0.0], &[1.0], 1.0, &opts).map_err(err)?;
    let free_time = start.elapsed();
    let start = Instant::now();
    let osc = richardson_action(&builtin("harmonic", &[("omega", 1.0)]), &[0.0], &[1.0], 1.0, 400, &opts).map_err(err)?;
    let osc_time = start.elapsed();
    c.near("free S(0,1,1)", free.value, 0.5, 1e-10);
    c.near("harmonic S(0,1,1)", osc.value, HARMONIC_ACTION_0_1_1, 1e-6);
    c.holds(&format!("harmonic finest resolution {} <= 800", osc.resolution), osc.resolution <= 800);
    c.at_most("free runtime [s]", free_time.as_secs_f64(), 1.0);
    c.at_most("harmonic runtime [s]", osc_time.as_secs_f64(), 1.0);
    Ok(())
}

fn convergence_order(c: &mut Criterion) -> Result<(), String> {
    let osc = builtin("harmonic", &[]);
    let exact = oscillator_action(0.0, 1.0, 1.0);
    let mut errors = Vec::new();
    for n in [50, 100, 200, 400] {
        errors.push((minimize_action(&osc, &[0.0], &[1.0], 1.0, n).map_err(err)?.value - exact).abs());
    }
    for (w, n) in errors.windows(2).zip([50, 100, 200]) {
        let ratio = w[0] / w[1];
        c.holds(
            &format!("error ratio N={n}->{} = {ratio:.4} in [3.5, 4.5]", 2 * n),
            (3.5..=4.5).contains(&ratio),
        );
    }
    Ok(())
}

fn hamilton_jacobi(c: &mut Criterion) -> Result<(), String> {
    let opts = ActionOptions::default();
    let grid = [-0.5, 0.0, 0.5];
    for l in [builtin("free_particle", &[]), builtin("harmonic", &[])] {
        let h = hamiltonian_of(&l);
        let mut worst = 0.0_f64;
        for &qa in &grid {
            for &qb in &grid {
                for t in [0.5, 1.0] {
                    worst = worst.max(hj_check(&l, &h, &[qa], &[qb], t, 1e-4, &opts).map_err(err)?.max_abs());
                }
            }
        }
        c.at_most(&format!("{} max HJ residual", l.name()), worst, 1e-5);
    }
    Ok(())
}

/// Spec files for the CLI runs, one per system.
struct Specs {
    dir: tempfile::TempDir,
}

impl Specs {
    fn new() -> Result<Self, String> {
        let dir = tempfile::tempdir().map_err(err)?;
        let specs = [
            ("free.json", r#"{"kind":"builtin","name":"free_particle","params":{"mass":1},"dimension":1}"#),
            ("free2.json", r#"{"kind":"builtin","name":"free_particle","params":{"mass":2},"dimension":1}"#),
            ("harmonic.json", r#"{"kind":"builtin","name":"harmonic","params":{"omega":1},"dimension":1}"#),
        ];
        for (name, text) in specs {
            fs::write(dir.path().join(name), text).map_err(err)?;
        }
        Ok(Self { dir })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

/// Runs `check-commute` through the binary; returns the exit code and the
/// parsed report.
fn check_commute(specs: &Specs, l1: &str, l2: &str, out: &Path) -> Result<(i32, Value), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_comaction"))
        .arg("check-commute")
        .arg("--l1")
        .arg(specs.path(l1))
        .arg("--l2")
        .arg(specs.path(l2))
        .arg("--out")
        .arg(out)
        .output()
        .map_err(err)?;
    let code = status.status.code().ok_or("terminated by signal")?;
    let text = fs::read_to_string(out).map_err(err)?;
    Ok((code, serde_json::from_str(&text).map_err(err)?))
}

fn summary_value(report: &Value, key: &str) -> f64 {
    report["summary"][key].as_f64().unwrap_or(f64::NAN)
}

fn commuting_pair(c: &mut Criterion) -> Result<(), String> {
    let specs = Specs::new()?;
    let out = specs.path("report.json");
    let start = Instant::now();
    let (code, report) = check_commute(&specs, "free.json", "free2.json", &out)?;
    let elapsed = start.elapsed();
    let delta = summary_value(&report, "max_action_commutator");
    let estimate = summary_value(&report, "max_error_estimate");
    c.holds(
        &format!("max |S12-S21| = {delta:.3e} <= 10 x max error estimate {estimate:.3e}"),
        delta <= 10.0 * estimate,
    );
    let probes = report["phase_probes"].as_array().map_or(0, Vec::len);
    c.holds(&format!("{probes} phase probes = 25"), probes == 25);
    c.at_most("max |{H1,H2}|", summary_value(&report, "max_poisson_bracket"), 1e-8);
    c.at_most("max flow commutator", summary_value(&report, "max_flow_commutator"), 1e-6);
    c.at_most("max genHJE residual", summary_value(&report, "max_genhje_residual"), 1e-5);
    c.at_most("max endpoint momentum mismatch", summary_value(&report, "max_endpoint_momentum_mismatch"), 1e-5);
    c.at_most("max junction momentum jump", summary_value(&report, "max_junction_jump"), 1e-5);
    c.at_most("max energy transport residual", summary_value(&report, "max_energy_transport_residual"), 1e-5);
    c.holds(&format!("verdict {} is commuting", report["verdict"]), report["verdict"] == "commuting");
    c.holds(&format!("exit code {code} = 0"), code == 0);
    c.at_most("runtime [s]", elapsed.as_secs_f64(), 60.0);
    Ok(())
}

fn non_commuting_pair(c: &mut Criterion) -> Result<(), String> {
    let start = Instant::now();
    let (free, osc) = (builtin("free_particle", &[]), builtin("harmonic", &[]));
    let (delta, _) = action_commutator(&free, &osc, &[0.0], &[1.0], 1.0, 1.0, &ActionOptions::default()).map_err(err)?;
    c.near("S12-S21 at (0,1,1,1)", delta, FREE_HARMONIC_COMMUTATOR, 1e-3);
    let (h1, h2) = (hamiltonian_of(&free), hamiltonian_of(&osc));
    c.near("{H1,H2} at (1,1)", poisson_bracket(&h1, &h2, &[1.0, 1.0]).map_err(err)?, 1.0, 1e-8);
    let flow = flow_commutator(&h1, &h2, &[0.0, 1.0], 0.5, 0.5, 1000).map_err(err)?;
    c.near("flow commutator at (0,1), t=0.5", flow.norm, FREE_HARMONIC_FLOW_COMMUTATOR, 1e-4);

    let specs = Specs::new()?;
    let (code, report) = check_commute(&specs, "free.json", "harmonic.json", &specs.path("report.json"))?;
    c.holds(&format!("verdict {} is non-commuting", report["verdict"]), report["verdict"] == "non-commuting");
    c.holds(&format!("exit code {code} = 1"), code == 1);
    c.at_most("runtime [s]", start.elapsed().as_secs_f64(), 30.0);
    Ok(())
}

fn discrete_commuting_pair(c: &mut Criterion) -> Result<(), String> {
    let start = Instant::now();
    let (a, b) = (discrete("discrete_quadratic", &[("h", 1.0)]), discrete("discrete_quadratic", &[("h", 2.0)]));
    let equal = discrete_composed_action(&a, &a, &[0.0], &[1.0], Order::OneTwo).map_err(err)?;
    c.near("corner q_mid, h1=h2=1", equal.q_mid[0], 0.5, 1e-12);
    let unequal = discrete_composed_action(&a, &b, &[0.0], &[1.0], Order::OneTwo).map_err(err)?;
    c.near("corner q_mid, h1=1 h2=2", unequal.q_mid[0], 1.0 / 3.0, 1e-12);

    let report = discrete_commutativity_report(&a, &b, &GridSpec::default(), &DiscreteOptions::default()).map_err(err)?;
    let s = &report.summary;
    c.holds(
        &format!("{} grid points = 25, {} failures", report.points.len(), s.failed_points),
        report.points.len() == 25 && s.failed_points == 0,
    );
    c.at_most("max discrete action commutator", s.max_action_commutator.unwrap_or(f64::NAN), 1e-10);
    c.at_most("max corner residual E0/E12", s.max_corner_residual.unwrap_or(f64::NAN), 1e-8);
    c.holds(&format!("{} phase probes = 25", report.phase_probes.len()), report.phase_probes.len() == 25);
    c.at_most("max map commutator", s.max_map_commutator.unwrap_or(f64::NAN), 1e-8);

    let half = discrete("discrete_quadratic", &[("h", 0.5)]);
    let step = discrete_map(&half, &[0.0], &[1.0], None).map_err(err)?;
    let miss = (step.q_next[0] + 0.5).abs().max((step.p_next[0] - 1.0).abs());
    c.at_most("|F(0,1) - (-0.5,1)| for h=0.5", miss, 1e-12);
    c.at_most("runtime [s]", start.elapsed().as_secs_f64(), 5.0);
    Ok(())
}

fn discrete_non_commuting_pair(c: &mut Criterion) -> Result<(), String> {
    let start = Instant::now();
    let (quad, kicked) = (discrete("discrete_quadratic", &[("h", 1.0)]), discrete("discrete_kicked", &[("h", 1.0), ("K", 0.3)]));
    let delta = discrete_action_commutator(&quad, &kicked, &[0.0], &[1.0]).map_err(err)?;
    c.near("S12-S21 at (0,1)", delta, QUAD_KICKED_COMMUTATOR, 1e-8);
    c.at_least("|S12-S21|", delta.abs(), 1e-3);
    let m = map_commutator(&quad, &kicked, &[0.0], &[1.0]).map_err(err)?;
    c.at_least("map commutator at (0,1)", m.norm, 1e-3);
    c.at_most("runtime [s]", start.elapsed().as_secs_f64(), 5.0);
    Ok(())
}

fn builtins() -> Vec<System> {
    catalog().iter().map(|e| catalog_lookup(&SystemSpec::builtin(e.name, &[])).unwrap()).collect()
}

fn symplecticity(c: &mut Criterion) -> Result<(), String> {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(8);
    for system in builtins() {
        let System::Discrete(l) = system else { continue };
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let (q, p) = ([rng.gen_range(-1.0..1.0)], [rng.gen_range(-1.0..1.0)]);
            worst = worst.max(symplecticity_check(&l, &q, &p).map_err(err)?);
        }
        c.at_most(&format!("{} max |DF^T J DF - J|", l.name()), worst, 1e-6);
    }
    c.at_most("runtime [s]", start.elapsed().as_secs_f64(), 5.0);
    Ok(())
}

fn legendre(c: &mut Criterion) -> Result<(), String> {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(9);
    for system in builtins() {
        let System::Continuous(l) = system else { continue };
        let pair = LegendrePair::new(l.clone());
        let (mut round_trip, mut identity) = (0.0_f64, 0.0_f64);
        let mut probes = 0;
        while probes < 100 {
            let q = [rng.gen_range(-1.0..1.0)];
            let qdot = [rng.gen_range(-2.0..2.0)];
            if !check_nondegeneracy(&l, &q, &qdot).ok {
                continue;
            }
            probes += 1;
            let p = momentum_of_velocity(&l, &q, &qdot).map_err(err)?;
            let guess = default_velocity_guess(&l, p.as_slice());
            let back = velocity_of_momentum(&l, &q, p.as_slice(), guess.as_slice()).map_err(err)?;
            round_trip = round_trip.max((back[0] - qdot[0]).abs());
            identity = identity.max(pair.identity_residual(&q, &qdot).map_err(err)?.abs());
        }
        c.at_most(&format!("{} round trip", l.name()), round_trip, 1e-8);
        c.at_most(&format!("{} H + L - <p, qdot>", l.name()), identity, 1e-8);
    }
    c.at_most("runtime [s]", start.elapsed().as_secs_f64(), 5.0);
    Ok(())
}

fn determinism(c: &mut Criterion) -> Result<(), String> {
    let specs = Specs::new()?;
    let (first, second) = (specs.path("a.json"), specs.path("b.json"));
    check_commute(&specs, "free.json", "harmonic.json", &first)?;
    check_commute(&specs, "free.json", "harmonic.json", &second)?;
    let (a, b) = (fs::read(&first).map_err(err)?, fs::read(&second).map_err(err)?);
    c.holds(&format!("reports of {} and {} bytes are identical", a.len(), b.len()), a == b);
    Ok(())
}

fn main() {
    let criteria: [(&str, Body); 10] = [
        ("principal action accuracy", principal_action_accuracy),
        ("convergence order", convergence_order),
        ("Hamilton-Jacobi identities", hamilton_jacobi),
        ("commuting continuous pair free(1)/free(2)", commuting_pair),
        ("non-commuting detection free(1)/harmonic(1)", non_commuting_pair),
        ("commuting discrete pair quadratic h=1/h=2", discrete_commuting_pair),
        ("non-commuting discrete pair quadratic/kicked", discrete_non_commuting_pair),
        ("symplecticity of discrete maps", symplecticity),
        ("Legendre round trip and identity", legendre),
        ("determinism of check-commute reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, body)) in criteria.iter().enumerate() {
        let mut c = Criterion::default();
        let start = Instant::now();
        let outcome = body(&mut c);
        let elapsed: Duration = start.elapsed();
        let ok = outcome.is_ok() && c.checks.iter().all(|k| k.ok);
        if !ok {
            failed += 1;
        }
        println!("{} criterion {:>2}: {name} ({:.2} s)", if ok { "PASS" } else { "FAIL" }, i + 1, elapsed.as_secs_f64());
        for k in &c.checks {
            println!("       [{}] {}", if k.ok { "ok" } else { "FAIL" }, k.label);
        }
        if let Err(e) = outcome {
            println!("       [FAIL] error: {e}");
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
