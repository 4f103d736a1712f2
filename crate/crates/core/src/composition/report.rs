use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bracket, composed_action_derivatives, CompositionPair, Order};
use crate::error::{Error, Result};
use crate::legendre::hamiltonian_of;
use crate::report::{
    max_abs, CommutativityReport, GridSpec, MaxAbs, ReportConfig, Summary, TimePair, VerdictRule,
    TOOL_VERSION,
};
use crate::systems::{HamiltonianSystem, LagrangianSystem};
use crate::trajectories::ActionOptions;

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub action: ActionOptions,
    /// Relative step of the central differences in the derivative identities.
    pub fd_step: f64,
    /// RK4 steps per unit time for flow commutators.
    pub flow_steps_per_unit: usize,
    pub rule: VerdictRule,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            action: ActionOptions::default(),
            fd_step: 1e-4,
            flow_steps_per_unit: 200,
            rule: VerdictRule::default(),
        }
    }
}

impl ReportOptions {
    fn flow_steps(&self, t1: f64, t2: f64) -> usize {
        ((self.flow_steps_per_unit as f64 * t1.max(t2)).ceil() as usize).max(10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousValues {
    pub s12: f64,
    pub s21: f64,
    pub action_commutator: f64,
    pub error_estimate: f64,
    pub resolution: usize,
    /// Bracket at `(q0, p_start)` of the order-12 solution.
    pub poisson_bracket: f64,
    pub flow_commutator_norm: f64,
    /// `p_start` mismatch followed by `p_end` mismatch.
    pub endpoint_momentum_mismatch: Vec<f64>,
    pub energy_transport_residuals: [f64; 2],
    /// Largest junction momentum jump over both orders.
    pub junction_jump: f64,
    /// Largest residual of the derivative identities of `S12`.
    pub genhje_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPoint {
    pub q0: Vec<f64>,
    pub q12: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub values: Option<ContinuousValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousProbe {
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson_bracket: Option<f64>,
    /// Largest flow commutator over the tested time pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_commutator_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub type ContinuousReport = CommutativityReport<ContinuousPoint, ContinuousProbe>;

struct Context<'a> {
    l1: &'a LagrangianSystem,
    l2: &'a LagrangianSystem,
    h1: HamiltonianSystem,
    h2: HamiltonianSystem,
    opts: &'a ReportOptions,
}

impl Context<'_> {
    fn evaluate(&self, q0: &[f64], q12: &[f64], t: TimePair) -> Result<ContinuousValues> {
        let a = &self.opts.action;
        let pair = CompositionPair::solve(self.l1, self.l2, q0, q12, t.t1, t.t2, a)?;
        let derivs = composed_action_derivatives(
            self.l1,
            self.l2,
            q0,
            q12,
            t.t1,
            t.t2,
            Order::OneTwo,
            self.opts.fd_step,
            a,
        )?;
        let x = [q0, pair.s12.p_start().as_slice()].concat();
        let poisson_bracket = bracket::poisson_bracket(&self.h1, &self.h2, &x)?;
        let flow = bracket::flow_commutator(
            &self.h1,
            &self.h2,
            &x,
            t.t1,
            t.t2,
            self.opts.flow_steps(t.t1, t.t2),
        )?;
        let (d0, d12) = pair.endpoint_mismatch();
        let (e1, e2) = pair.energy_transport(&self.h1, &self.h2, q0, q12);
        Ok(ContinuousValues {
            s12: pair.s12.value(),
            s21: pair.s21.value(),
            action_commutator: pair.commutator(),
            error_estimate: pair.error_estimate(),
            resolution: pair.s12.action.resolution.max(pair.s21.action.resolution),
            poisson_bracket,
            flow_commutator_norm: flow.norm,
            endpoint_momentum_mismatch: d0.iter().chain(d12.iter()).copied().collect(),
            energy_transport_residuals: [e1, e2],
            junction_jump: pair.s12.junction_jump.amax().max(pair.s21.junction_jump.amax()),
            genhje_residual: derivs.max_abs(),
        })
    }

    fn probe(&self, x: &[f64], times: &[TimePair]) -> Result<(f64, f64)> {
        let bracket = bracket::poisson_bracket(&self.h1, &self.h2, x)?;
        let mut flow = 0.0_f64;
        for t in times {
            let steps = self.opts.flow_steps(t.t1, t.t2);
            flow = flow.max(bracket::flow_commutator(&self.h1, &self.h2, x, t.t1, t.t2, steps)?.norm);
        }
        Ok((bracket, flow))
    }
}

/// Evaluate both composed actions and every derived check over the
/// endpoint grid and time pairs, plus brackets and flow commutators on the
/// phase-space probe grid.
///
/// Failed points are recorded with their error and count against the
/// verdict; they do not abort the report.
pub fn commutativity_report(
    l1: &LagrangianSystem,
    l2: &LagrangianSystem,
    grid: &GridSpec,
    times: &[TimePair],
    opts: &ReportOptions,
) -> Result<ContinuousReport> {
    grid.validate()?;
    if times.is_empty() {
        return Err(Error::InvalidGrid("no time pairs given".into()));
    }
    if l1.dimension() != l2.dimension() {
        return Err(Error::DimensionMismatch {
            expected: l1.dimension(),
            got: l2.dimension(),
        });
    }
    let n = l1.dimension();
    let ctx = Context {
        l1,
        l2,
        h1: hamiltonian_of(l1),
        h2: hamiltonian_of(l2),
        opts,
    };

    let tasks: Vec<_> = grid
        .endpoint_pairs(n)
        .into_iter()
        .flat_map(|(q0, q12)| times.iter().map(move |&t| (q0.clone(), q12.clone(), t)))
        .collect();
    let points: Vec<ContinuousPoint> = tasks
        .into_par_iter()
        .map(|(q0, q12, t)| {
            let outcome = ctx.evaluate(&q0, &q12, t);
            let (values, error) = match outcome {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ContinuousPoint {
                q0,
                q12,
                t1: t.t1,
                t2: t.t2,
                values,
                error,
            }
        })
        .collect();
    let probes: Vec<ContinuousProbe> = grid
        .phase_probes(n)
        .into_par_iter()
        .map(|x| match ctx.probe(&x, times) {
            Ok((b, f)) => ContinuousProbe {
                x,
                poisson_bracket: Some(b),
                flow_commutator_norm: Some(f),
                error: None,
            },
            Err(e) => ContinuousProbe {
                x,
                poisson_bracket: None,
                flow_commutator_norm: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let summary = summarize(&points, &probes);
    let verdict = opts.rule.decide(
        points
            .iter()
            .map(|p| p.values.as_ref().map(|v| (v.action_commutator, v.error_estimate))),
    );
    Ok(CommutativityReport {
        config: ReportConfig {
            systems: [l1.name().to_string(), l2.name().to_string()],
            grid: *grid,
            times: times.to_vec(),
            tol: opts.action.target_tol,
            initial_resolution: Some(opts.action.initial_resolution),
            max_resolution: Some(opts.action.max_resolution),
            verdict_rule: opts.rule,
        },
        points,
        phase_probes: probes,
        summary,
        verdict,
        tool_version: TOOL_VERSION.to_string(),
    })
}

fn summarize(points: &[ContinuousPoint], probes: &[ContinuousProbe]) -> Summary {
    let mut action = MaxAbs::default();
    let mut err = MaxAbs::default();
    let mut bracket = MaxAbs::default();
    let mut flow = MaxAbs::default();
    let mut mismatch = MaxAbs::default();
    let mut energy = MaxAbs::default();
    let mut jump = MaxAbs::default();
    let mut genhje = MaxAbs::default();
    for v in points.iter().filter_map(|p| p.values.as_ref()) {
        action.push(v.action_commutator);
        err.push(v.error_estimate);
        bracket.push(v.poisson_bracket);
        flow.push(v.flow_commutator_norm);
        mismatch.push(max_abs(&v.endpoint_momentum_mismatch));
        energy.extend(v.energy_transport_residuals);
        jump.push(v.junction_jump);
        genhje.push(v.genhje_residual);
    }
    for p in probes {
        bracket.extend(p.poisson_bracket);
        flow.extend(p.flow_commutator_norm);
    }
    let failed = points.iter().filter(|p| p.values.is_none()).count()
        + probes.iter().filter(|p| p.error.is_some()).count();
    Summary {
        max_action_commutator: action.get(),
        max_poisson_bracket: bracket.get(),
        max_flow_commutator: flow.get(),
        max_error_estimate: err.get(),
        max_endpoint_momentum_mismatch: mismatch.get(),
        max_energy_transport_residual: energy.get(),
        max_junction_jump: jump.get(),
        max_genhje_residual: genhje.get(),
        failed_points: failed,
        total_points: points.len() + probes.len(),
        ..Default::default()
    }
}
