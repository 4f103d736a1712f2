use std::fs;

use comaction::discrete::DiscreteOptions;
use comaction::report::TOOL_VERSION;
use comaction::{
    catalog, catalog_lookup, commutativity_report, composed_action, discrete_commutativity_report,
    discrete_map, hamiltonian_of, hj_check, integrate_flow, parse_system_spec, poisson_bracket,
    principal_action, ActionOptions, DiscreteLagrangian, GridSpec, LagrangianSystem, Order,
    ReportOptions, System, Verdict,
};
use serde_json::json;

use crate::args::{Command, GridArgs, OrderArg, OutputArgs, PairArgs, SolveArgs};
use crate::{CliError, Outcome, EXIT_INCONCLUSIVE, EXIT_NON_COMMUTING, EXIT_OK};

pub(crate) fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Catalog { output }
        | Command::Action { output, .. }
        | Command::Flow { output, .. }
        | Command::HjCheck { output, .. }
        | Command::Compose { output, .. }
        | Command::CheckCommute { output, .. }
        | Command::DiscreteMap { output, .. }
        | Command::CheckCommuteDiscrete { output, .. }
        | Command::Poisson { output, .. } => output,
    }
}

/// A spec argument is inline JSON when it starts with `{`, a file path
/// otherwise.
fn load_system(arg: &str) -> Result<System, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("cannot read system spec {arg}: {e}")))?
    };
    let spec = parse_system_spec(&text)?;
    Ok(catalog_lookup(&spec)?)
}

fn continuous(arg: &str) -> Result<LagrangianSystem, CliError> {
    Ok(load_system(arg)?.into_continuous()?)
}

fn discrete(arg: &str) -> Result<DiscreteLagrangian, CliError> {
    Ok(load_system(arg)?.into_discrete()?)
}

fn continuous_pair(pair: &PairArgs) -> Result<(LagrangianSystem, LagrangianSystem), CliError> {
    Ok((continuous(&pair.l1)?, continuous(&pair.l2)?))
}

fn action_options(solve: &SolveArgs) -> ActionOptions {
    ActionOptions {
        target_tol: solve.tol,
        initial_resolution: solve.resolution,
        max_resolution: solve.max_resolution,
        ..ActionOptions::default()
    }
}

fn grid(args: &GridArgs) -> GridSpec {
    GridSpec {
        points: args.grid,
        qrange: args.qrange,
        prange: args.prange,
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Commuting => EXIT_OK,
        Verdict::NonCommuting => EXIT_NON_COMMUTING,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}


pub(crate) fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Catalog { .. } => {
            let entries: Vec<_> = catalog()
                .iter()
                .map(|e| {
                    let params: serde_json::Map<_, _> =
                        e.params.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                    json!({
                        "name": e.name,
                        "kind": e.kind,
                        "params": params,
                        "formula": e.formula,
                    })
                })
                .collect();
            let summary = format!("catalog: {} systems", entries.len());
            Ok(Outcome::new(&json!({ "systems": entries, "tool_version": TOOL_VERSION }), summary, EXIT_OK))
        }
        Command::Action { system, from, to, time, solve, .. } => {
            let l = continuous(&system.system)?;
            let r = principal_action(&l, from, to, *time, &action_options(solve))?;
            let summary = format!(
                "action: value {} (error estimate {:e}, N = {})",
                r.value, r.error_estimate, r.resolution
            );
            let doc = json!({
                "system": l.name(),
                "from": from,
                "to": to,
                "time": time,
                "value": r.value,
                "error_estimate": r.error_estimate,
                "resolution": r.resolution,
                "p_start": r.p_start.as_slice(),
                "p_end": r.p_end.as_slice(),
                "minimum": r.is_minimum(),
                "diag": r.diag,
                "tool_version": TOOL_VERSION,
            });
            Ok(Outcome::new(&doc, summary, EXIT_OK))
        }
        Command::Flow { system, x0, time, steps, .. } => {
            let l = continuous(&system.system)?;
            let h = hamiltonian_of(&l);
            let path = integrate_flow(&h, x0, *time, *steps)?;
            let end = path.last().as_slice();
            let summary = format!("flow: x({time}) = {end:?}");
            let doc = json!({
                "system": h.name(),
                "x0": x0,
                "time": time,
                "steps": steps,
                "x_end": end,
                "energy_start": h.eval(&x0[..x0.len() / 2], &x0[x0.len() / 2..]),
                "energy_end": h.eval(&end[..end.len() / 2], &end[end.len() / 2..]),
                "tool_version": TOOL_VERSION,
            });
            Ok(Outcome::new(&doc, summary, EXIT_OK))
        }
        Command::HjCheck { system, from, to, time, fd_step, solve, .. } => {
            let l = continuous(&system.system)?;
            let h = hamiltonian_of(&l);
            let r = hj_check(&l, &h, from, to, *time, *fd_step, &action_options(solve))?;
            let summary = format!("hj-check: max residual {:e}", r.max_abs());
            let doc = json!({
                "system": l.name(),
                "from": from,
                "to": to,
                "time": time,
                "fd_step": fd_step,
                "res_qa": r.res_qa.as_slice(),
                "res_qb": r.res_qb.as_slice(),
                "res_t": r.res_t,
                "max_residual": r.max_abs(),
                "tool_version": TOOL_VERSION,
            });
            Ok(Outcome::new(&doc, summary, EXIT_OK))
        }
        Command::Compose { pair, from, to, times, order, solve, .. } => {
            let (l1, l2) = continuous_pair(pair)?;
            let [t] = times.0.as_slice() else {
                return Err(CliError::Usage("compose takes exactly one t1:t2 pair".into()));
            };
            let order = match order {
                OrderArg::Twelve => Order::OneTwo,
                OrderArg::TwentyOne => Order::TwoOne,
            };
            let r = composed_action(&l1, &l2, from, to, t.t1, t.t2, order, &action_options(solve))?;
            let label = match order {
                Order::OneTwo => "S12",
                Order::TwoOne => "S21",
            };
            let summary = format!(
                "compose: {label} = {} (error estimate {:e}), junction {:?}",
                r.value(),
                r.error_estimate(),
                r.junction.as_slice()
            );
            let doc = json!({
                "systems": [l1.name(), l2.name()],
                "order": order,
                "from": from,
                "to": to,
                "t1": t.t1,
                "t2": t.t2,
                "value": r.value(),
                "error_estimate": r.error_estimate(),
                "resolution": r.action.resolution,
                "junction": r.junction.as_slice(),
                "junction_jump": r.junction_jump.as_slice(),
                "p_start": r.p_start().as_slice(),
                "p_end": r.p_end().as_slice(),
                "minimum": r.action.is_minimum(),
                "tool_version": TOOL_VERSION,
            });
            Ok(Outcome::new(&doc, summary, EXIT_OK))
        }
        Command::CheckCommute { pair, grid: g, times, solve, .. } => {
            let (l1, l2) = continuous_pair(pair)?;
            let opts = ReportOptions {
                action: action_options(solve),
                ..ReportOptions::default()
            };
            let report = commutativity_report(&l1, &l2, &grid(g), &times.0, &opts)?;
            let summary = format!(
                "check-commute: {} (max |S12 - S21| {:e}, max error estimate {:e}, {} of {} points failed)",
                report.verdict.as_str(),
                report.summary.max_action_commutator.unwrap_or(f64::NAN),
                report.summary.max_error_estimate.unwrap_or(f64::NAN),
                report.summary.failed_points,
                report.summary.total_points,
            );
            Ok(Outcome::new(&report, summary, verdict_code(report.verdict)))
        }
        Command::DiscreteMap { system, q0, p0, guess, .. } => {
            let l = discrete(&system.system)?;
            let r = discrete_map(&l, q0, p0, guess.as_deref())?;
            let summary = format!(
                "discrete-map: q_next {:?}, p_next {:?}",
                r.q_next.as_slice(),
                r.p_next.as_slice()
            );
            let doc = json!({
                "system": l.name(),
                "q0": q0,
                "p0": p0,
                "q_next": r.q_next.as_slice(),
                "p_next": r.p_next.as_slice(),
                "diag": r.diag,
                "tool_version": TOOL_VERSION,
            });
            Ok(Outcome::new(&doc, summary, EXIT_OK))
        }
        Command::CheckCommuteDiscrete { pair, grid: g, tol, .. } => {
            let (l1, l2) = (discrete(&pair.l1)?, discrete(&pair.l2)?);
            let opts = DiscreteOptions {
                tol: *tol,
                ..DiscreteOptions::default()
            };
            let report = discrete_commutativity_report(&l1, &l2, &grid(g), &opts)?;
            let summary = format!(
                "check-commute-discrete: {} (max |S12 - S21| {:e}, max map commutator {:e})",
                report.verdict.as_str(),
                report.summary.max_action_commutator.unwrap_or(f64::NAN),
                report.summary.max_map_commutator.unwrap_or(f64::NAN),
            );
            Ok(Outcome::new(&report, summary, verdict_code(report.verdict)))
        }
        Command::Poisson { pair, x, .. } => {
            let (l1, l2) = continuous_pair(pair)?;
            let (h1, h2) = (hamiltonian_of(&l1), hamiltonian_of(&l2));
            let bracket = poisson_bracket(&h1, &h2, x)?;
            let doc = json!({
                "systems": [h1.name(), h2.name()],
                "x": x,
                "poisson_bracket": bracket,
                "tool_version": TOOL_VERSION,
            });
            Ok(Outcome::new(&doc, format!("poisson: {{H1, H2}} = {bracket}"), EXIT_OK))
        }
    }
}
