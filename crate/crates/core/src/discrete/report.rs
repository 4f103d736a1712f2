use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{map_commutator, solve_corner, symplecticity_check};
use crate::error::{Error, Result};
use crate::numerics::DEFAULT_TOL;
use crate::report::{
    max_abs, CommutativityReport, GridSpec, MaxAbs, ReportConfig, Summary, VerdictRule, TOOL_VERSION,
};
use crate::systems::DiscreteLagrangian;

#[derive(Debug, Clone, Copy)]
pub struct DiscreteOptions {
    /// Absolute error attributed to every composed action; no
    /// discretization is involved, only solver round-off.
    pub tol: f64,
    pub rule: VerdictRule,
}

impl Default for DiscreteOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            rule: VerdictRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteValues {
    pub s12: f64,
    pub s21: f64,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub action_commutator: f64,
    pub error_estimate: f64,
    pub e0: Vec<f64>,
    pub e12: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePoint {
    pub q0: Vec<f64>,
    pub q12: Vec<f64>,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub values: Option<DiscreteValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProbeValues {
    pub map_commutator_norm: f64,
    pub x_12: Vec<f64>,
    pub x_21: Vec<f64>,
    /// Symplecticity defect of `F1` and `F2` at the probe.
    pub symplecticity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProbe {
    pub x: Vec<f64>,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub values: Option<DiscreteProbeValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub type DiscreteReport = CommutativityReport<DiscretePoint, DiscreteProbe>;

fn split<T>(outcome: Result<T>) -> (Option<T>, Option<String>) {
    match outcome {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Action commutator and corner residuals over the `(q0, q12)` grid, map
/// commutator and symplecticity over the phase probes.
pub fn discrete_commutativity_report(
    l1: &DiscreteLagrangian,
    l2: &DiscreteLagrangian,
    grid: &GridSpec,
    opts: &DiscreteOptions,
) -> Result<DiscreteReport> {
    grid.validate()?;
    if l1.dimension() != l2.dimension() {
        return Err(Error::DimensionMismatch {
            expected: l1.dimension(),
            got: l2.dimension(),
        });
    }
    let n = l1.dimension();
    let points: Vec<DiscretePoint> = grid
        .endpoint_pairs(n)
        .into_par_iter()
        .map(|(q0, q12)| {
            let (values, error) = split(solve_corner(l1, l2, &q0, &q12, None).map(|c| DiscreteValues {
                s12: c.s12(),
                s21: c.s21(),
                q1: c.q1.q_mid.as_slice().to_vec(),
                q2: c.q2.q_mid.as_slice().to_vec(),
                action_commutator: c.s12() - c.s21(),
                error_estimate: opts.tol,
                e0: c.e0.as_slice().to_vec(),
                e12: c.e12.as_slice().to_vec(),
            }));
            DiscretePoint { q0, q12, values, error }
        })
        .collect();
    let probes: Vec<DiscreteProbe> = grid
        .phase_probes(n)
        .into_par_iter()
        .map(|x| {
            let (q, p) = x.split_at(n);
            let outcome = map_commutator(l1, l2, q, p).and_then(|m| {
                Ok(DiscreteProbeValues {
                    map_commutator_norm: m.norm,
                    x_12: m.x_12.as_slice().to_vec(),
                    x_21: m.x_21.as_slice().to_vec(),
                    symplecticity: [symplecticity_check(l1, q, p)?, symplecticity_check(l2, q, p)?],
                })
            });
            let (values, error) = split(outcome);
            DiscreteProbe { x, values, error }
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
            times: Vec::new(),
            tol: opts.tol,
            initial_resolution: None,
            max_resolution: None,
            verdict_rule: opts.rule,
        },
        points,
        phase_probes: probes,
        summary,
        verdict,
        tool_version: TOOL_VERSION.to_string(),
    })
}

fn summarize(points: &[DiscretePoint], probes: &[DiscreteProbe]) -> Summary {
    let mut action = MaxAbs::default();
    let mut err = MaxAbs::default();
    let mut corner = MaxAbs::default();
    let mut map = MaxAbs::default();
    for v in points.iter().filter_map(|p| p.values.as_ref()) {
        action.push(v.action_commutator);
        err.push(v.error_estimate);
        corner.push(max_abs(&v.e0).max(max_abs(&v.e12)));
    }
    for v in probes.iter().filter_map(|p| p.values.as_ref()) {
        map.push(v.map_commutator_norm);
    }
    let failed = points.iter().filter(|p| p.values.is_none()).count()
        + probes.iter().filter(|p| p.values.is_none()).count();
    Summary {
        max_action_commutator: action.get(),
        max_error_estimate: err.get(),
        max_corner_residual: corner.get(),
        max_map_commutator: map.get(),
        failed_points: failed,
        total_points: points.len() + probes.len(),
        ..Default::default()
    }
}
