//! Composed principal actions `S12`, `S21` through an intermediate point and
//! the Hamiltonian-side consequences of their equality.

mod bracket;
mod report;

pub use bracket::{flow_commutator, poisson_bracket, FlowCommutator};
pub use report::{commutativity_report, ContinuousPoint, ContinuousProbe, ContinuousReport, ReportOptions};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::legendre::hamiltonian_of;
use crate::numerics::SolveDiagnostics;
use crate::systems::{HamiltonianSystem, LagrangianSystem};
use crate::trajectories::glued::{GluedAction, GluedSolution, Piece};
use crate::trajectories::{
    central_difference, check_horizon, principal_action, refine_until, richardson, ActionOptions,
    ActionResult, DiscretePath,
};

/// Which Lagrangian acts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    /// `L1` on `[0, t1]`, then `L2` for `t2`.
    #[serde(rename = "12")]
    OneTwo,
    /// `L2` on `[0, t2]`, then `L1` for `t1`.
    #[serde(rename = "21")]
    TwoOne,
}

#[derive(Debug, Clone)]
pub struct ComposedActionResult {
    pub order: Order,
    /// Path point at the switch time.
    pub junction: DVector<f64>,
    /// One-sided momentum before the switch minus the one after.
    pub junction_jump: DVector<f64>,
    /// Glued path, extrapolated value and boundary momenta.
    pub action: ActionResult,
}

impl ComposedActionResult {
    pub fn value(&self) -> f64 {
        self.action.value
    }

    pub fn p_start(&self) -> &DVector<f64> {
        &self.action.p_start
    }

    pub fn p_end(&self) -> &DVector<f64> {
        &self.action.p_end
    }

    pub fn error_estimate(&self) -> f64 {
        self.action.error_estimate
    }
}

/// Systems and durations in the order they act.
struct Arrangement<'a> {
    first: (&'a LagrangianSystem, f64),
    second: (&'a LagrangianSystem, f64),
}

impl<'a> Arrangement<'a> {
    fn new(
        l1: &'a LagrangianSystem,
        l2: &'a LagrangianSystem,
        t1: f64,
        t2: f64,
        order: Order,
    ) -> Result<Self> {
        check_dim(l1.dimension(), l2.dimension())?;
        check_horizon(l1, t1)?;
        check_horizon(l2, t2)?;
        Ok(match order {
            Order::OneTwo => Self {
                first: (l1, t1),
                second: (l2, t2),
            },
            Order::TwoOne => Self {
                first: (l2, t2),
                second: (l1, t1),
            },
        })
    }

    /// Step counts proportional to the durations, at least one each.
    fn split(&self, total: usize) -> (usize, usize) {
        let span = self.first.1 + self.second.1;
        let n1 = ((total as f64 * self.first.1 / span).round() as usize).clamp(1, total.max(2) - 1);
        (n1, total.max(2) - n1)
    }

    fn solve(&self, qa: &[f64], qb: &[f64], steps: (usize, usize), opts: &ActionOptions) -> Result<GluedSolution> {
        let glued = GluedAction::new(&[
            Piece {
                lagrangian: self.first.0,
                duration: self.first.1,
                steps: steps.0,
            },
            Piece {
                lagrangian: self.second.0,
                duration: self.second.1,
                steps: steps.1,
            },
        ])?;
        glued.solve(qa, qb, opts.solver())
    }

    /// Richardson pair with `steps` on the coarse level.
    fn pair(&self, order: Order, qa: &[f64], qb: &[f64], steps: (usize, usize), opts: &ActionOptions) -> Result<ComposedActionResult> {
        let coarse = self.solve(qa, qb, steps, opts)?;
        let fine = self.solve(qa, qb, (2 * steps.0, 2 * steps.1), opts)?;
        let junction = (&fine.path.points[2 * steps.0] * 4.0 - &coarse.path.points[steps.0]) / 3.0;
        let jump = &fine.junctions[0].before - &fine.junctions[0].after;
        Ok(ComposedActionResult {
            order,
            junction,
            junction_jump: jump,
            action: richardson(&coarse, fine),
        })
    }
}

/// Composed action `S12(q0, q12, t1, t2)` or `S21(q0, q12, t2, t1)`, found by
/// one joint solve over the glued path with the junction as an ordinary
/// interior node.
#[allow(clippy::too_many_arguments)]
pub fn composed_action(
    l1: &LagrangianSystem,
    l2: &LagrangianSystem,
    q0: &[f64],
    q12: &[f64],
    t1: f64,
    t2: f64,
    order: Order,
    opts: &ActionOptions,
) -> Result<ComposedActionResult> {
    let arrangement = Arrangement::new(l1, l2, t1, t2, order)?;
    refine_until(
        opts,
        |r: &ComposedActionResult| &r.action,
        |r| r.action,
        |n| arrangement.pair(order, q0, q12, arrangement.split(n), opts),
    )
}

/// Composition with the junction pinned at `q_mid` instead of solved for.
/// Away from the critical junction the jump is the action's gradient in the
/// junction point.
#[allow(clippy::too_many_arguments)]
pub fn composed_action_with_junction(
    l1: &LagrangianSystem,
    l2: &LagrangianSystem,
    q0: &[f64],
    q_mid: &[f64],
    q12: &[f64],
    t1: f64,
    t2: f64,
    order: Order,
    opts: &ActionOptions,
) -> Result<ComposedActionResult> {
    let a = Arrangement::new(l1, l2, t1, t2, order)?;
    let left = principal_action(a.first.0, q0, q_mid, a.first.1, opts)?;
    let right = principal_action(a.second.0, q_mid, q12, a.second.1, opts)?;
    let offset = left.path.t_end();
    let mut path = left.path.clone();
    path.switch_nodes.push(path.points.len() - 1);
    path.times.extend(right.path.times.iter().skip(1).map(|t| t + offset));
    path.points.extend(right.path.points.iter().skip(1).cloned());
    let path = DiscretePath {
        switch_nodes: path.switch_nodes,
        times: path.times,
        points: path.points,
    };
    let diag = SolveDiagnostics {
        iterations: left.diag.iterations + right.diag.iterations,
        final_residual_norm: left.diag.final_residual_norm.max(right.diag.final_residual_norm),
        converged: left.diag.converged && right.diag.converged,
        hessian_positive_definite: Some(left.is_minimum() && right.is_minimum()),
    };
    Ok(ComposedActionResult {
        order,
        junction: DVector::from_column_slice(q_mid),
        junction_jump: &left.p_end - &right.p_start,
        action: ActionResult {
            value: left.value + right.value,
            p_start: left.p_start,
            p_end: right.p_end,
            diag,
            resolution: left.resolution + right.resolution,
            error_estimate: left.error_estimate + right.error_estimate,
            path,
        },
    })
}

pub fn junction_momentum_jump(result: &ComposedActionResult) -> &DVector<f64> {
    &result.junction_jump
}

/// Both orders of composition at the same endpoints and durations.
#[derive(Debug, Clone)]
pub struct CompositionPair {
    pub s12: ComposedActionResult,
    pub s21: ComposedActionResult,
}

impl CompositionPair {
    #[allow(clippy::too_many_arguments)]
    pub fn solve(
        l1: &LagrangianSystem,
        l2: &LagrangianSystem,
        q0: &[f64],
        q12: &[f64],
        t1: f64,
        t2: f64,
        opts: &ActionOptions,
    ) -> Result<Self> {
        Ok(Self {
            s12: composed_action(l1, l2, q0, q12, t1, t2, Order::OneTwo, opts)?,
            s21: composed_action(l1, l2, q0, q12, t1, t2, Order::TwoOne, opts)?,
        })
    }

    pub fn commutator(&self) -> f64 {
        self.s12.value() - self.s21.value()
    }

    pub fn error_estimate(&self) -> f64 {
        self.s12.error_estimate() + self.s21.error_estimate()
    }

    /// `(p_start(12) − p_start(21), p_end(12) − p_end(21))`
    pub fn endpoint_mismatch(&self) -> (DVector<f64>, DVector<f64>) {
        (
            self.s12.p_start() - self.s21.p_start(),
            self.s12.p_end() - self.s21.p_end(),
        )
    }

    /// `(H1(q0, p_start(12)) − H1(q12, p_end(21)), H2(q0, p_start(21)) − H2(q12, p_end(12)))`
    pub fn energy_transport(
        &self,
        h1: &HamiltonianSystem,
        h2: &HamiltonianSystem,
        q0: &[f64],
        q12: &[f64],
    ) -> (f64, f64) {
        (
            h1.eval(q0, self.s12.p_start().as_slice()) - h1.eval(q12, self.s21.p_end().as_slice()),
            h2.eval(q0, self.s21.p_start().as_slice()) - h2.eval(q12, self.s12.p_end().as_slice()),
        )
    }
}

/// `S12(q0, q12, t1, t2) − S21(q0, q12, t2, t1)` and the summed error
/// estimate of the two extrapolations.
pub fn action_commutator(
    l1: &LagrangianSystem,
    l2: &LagrangianSystem,
    q0: &[f64],
    q12: &[f64],
    t1: f64,
    t2: f64,
    opts: &ActionOptions,
) -> Result<(f64, f64)> {
    let pair = CompositionPair::solve(l1, l2, q0, q12, t1, t2, opts)?;
    Ok((pair.commutator(), pair.error_estimate()))
}

pub fn endpoint_momentum_mismatch(
    l1: &LagrangianSystem,
    l2: &LagrangianSystem,
    q0: &[f64],
    q12: &[f64],
    t1: f64,
    t2: f64,
    opts: &ActionOptions,
) -> Result<(DVector<f64>, DVector<f64>)> {
    Ok(CompositionPair::solve(l1, l2, q0, q12, t1, t2, opts)?.endpoint_mismatch())
}

pub fn energy_transport_check(
    l1: &LagrangianSystem,
    l2: &LagrangianSystem,
    q0: &[f64],
    q12: &[f64],
    t1: f64,
    t2: f64,
    opts: &ActionOptions,
) -> Result<(f64, f64)> {
    let pair = CompositionPair::solve(l1, l2, q0, q12, t1, t2, opts)?;
    Ok(pair.energy_transport(&hamiltonian_of(l1), &hamiltonian_of(l2), q0, q12))
}

/// Residuals of the partial-derivative identities of a composed action.
#[derive(Debug, Clone)]
pub struct ComposedDerivativeResiduals {
    /// `∂S/∂q0 + p_start`
    pub r_q0: DVector<f64>,
    /// `∂S/∂q12 − p_end`
    pub r_q12: DVector<f64>,
    /// `∂S/∂t1 + H1` at the state where `L1` acts at a boundary.
    pub r_t1: f64,
    /// `∂S/∂t2 + H2` likewise.
    pub r_t2: f64,
}

impl ComposedDerivativeResiduals {
    pub fn max_abs(&self) -> f64 {
        self.r_q0
            .amax()
            .max(self.r_q12.amax())
            .max(self.r_t1.abs())
            .max(self.r_t2.abs())
    }
}

/// Central differences of the composed action against boundary momenta and
/// energies. The duration of the system acting first pairs with its energy
/// at the start state, the other with its energy at the end state.
///
/// Step counts are frozen at the resolution reached by the base solve.
#[allow(clippy::too_many_arguments)]
pub fn composed_action_derivatives(
    l1: &LagrangianSystem,
    l2: &LagrangianSystem,
    q0: &[f64],
    q12: &[f64],
    t1: f64,
    t2: f64,
    order: Order,
    fd_step: f64,
    opts: &ActionOptions,
) -> Result<ComposedDerivativeResiduals> {
    let base = composed_action(l1, l2, q0, q12, t1, t2, order, opts)?;
    let (h1, h2) = (hamiltonian_of(l1), hamiltonian_of(l2));
    let steps = Arrangement::new(l1, l2, t1, t2, order)?.split(base.action.resolution / 2);
    let value = |q0: &[f64], q12: &[f64], t1: f64, t2: f64| -> Result<f64> {
        let a = Arrangement::new(l1, l2, t1, t2, order)?;
        Ok(a.pair(order, q0, q12, steps, opts)?.value())
    };
    let n = q0.len();
    let mut r_q0 = DVector::zeros(n);
    let mut r_q12 = DVector::zeros(n);
    let shifted = |v: &[f64], i: usize, x: f64| {
        let mut w = v.to_vec();
        w[i] = x;
        w
    };
    for i in 0..n {
        r_q0[i] = central_difference(q0[i], fd_step, |x| value(&shifted(q0, i, x), q12, t1, t2))?
            + base.p_start()[i];
        r_q12[i] = central_difference(q12[i], fd_step, |x| value(q0, &shifted(q12, i, x), t1, t2))?
            - base.p_end()[i];
    }
    let ds_dt1 = central_difference(t1, fd_step, |t| value(q0, q12, t, t2))?;
    let ds_dt2 = central_difference(t2, fd_step, |t| value(q0, q12, t1, t))?;
    let start_energy = |h: &HamiltonianSystem| h.eval(q0, base.p_start().as_slice());
    let end_energy = |h: &HamiltonianSystem| h.eval(q12, base.p_end().as_slice());
    let (e1, e2) = match order {
        Order::OneTwo => (start_energy(&h1), end_energy(&h2)),
        Order::TwoOne => (end_energy(&h1), start_energy(&h2)),
    };
    Ok(ComposedDerivativeResiduals {
        r_q0,
        r_q12,
        r_t1: ds_dt1 + e1,
        r_t2: ds_dt2 + e2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{catalog_lookup, SystemSpec};
    use approx::assert_abs_diff_eq;

    fn builtin(name: &str, params: &[(&str, f64)]) -> LagrangianSystem {
        catalog_lookup(&SystemSpec::builtin(name, params)).unwrap().into_continuous().unwrap()
    }

    fn free(m: f64) -> LagrangianSystem {
        builtin("free_particle", &[("mass", m)])
    }

    fn opts() -> ActionOptions {
        ActionOptions::default()
    }

    #[test]
    fn series_free_particles() {
        let (a, b) = (free(1.0), free(2.0));
        for order in [Order::OneTwo, Order::TwoOne] {
            let r = composed_action(&a, &b, &[0.0], &[1.0], 1.0, 1.0, order, &opts()).unwrap();
            assert_abs_diff_eq!(r.value(), 1.0 / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.p_start()[0], 2.0 / 3.0, epsilon = 1e-10);
            assert_abs_diff_eq!(r.p_end()[0], 2.0 / 3.0, epsilon = 1e-10);
            assert!(r.junction_jump.amax() <= 1e-9);
        }
        let r = composed_action(&a, &b, &[0.0], &[1.0], 1.0, 1.0, Order::OneTwo, &opts()).unwrap();
        assert_abs_diff_eq!(r.junction[0], 2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn free_then_oscillator() {
        let (a, b) = (free(1.0), builtin("harmonic", &[]));
        let pair = CompositionPair::solve(&a, &b, &[0.0], &[1.0], 1.0, 1.0, &opts()).unwrap();
        assert_abs_diff_eq!(pair.s12.value(), -0.108979049230431, epsilon = 1e-8);
        assert_abs_diff_eq!(pair.s12.junction[0], 0.723707721626858, epsilon = 1e-6);
        assert_abs_diff_eq!(pair.s21.value(), 0.195510475384785, epsilon = 1e-8);
        assert_abs_diff_eq!(pair.s21.junction[0], 0.608979049230431, epsilon = 1e-6);
        assert_abs_diff_eq!(pair.commutator(), -0.304489524615215, epsilon = 1e-8);
        // From q0 = 0 both orders leave with the same momentum; they arrive
        // with different ones.
        let (d0, d12) = pair.endpoint_mismatch();
        assert_abs_diff_eq!(d0[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(d12[0], -0.608979049230431, epsilon = 1e-6);
        let (e1, e2) = pair.energy_transport(&hamiltonian_of(&a), &hamiltonian_of(&b), &[0.0], &[1.0]);
        assert!(e1.abs().max(e2.abs()) > 1e-2);
    }

    #[test]
    fn identical_problems_give_exact_zero() {
        let osc = builtin("harmonic", &[]);
        let pair = CompositionPair::solve(&osc, &osc, &[0.1], &[0.3], 0.7, 0.7, &opts()).unwrap();
        assert_eq!(pair.commutator(), 0.0);
        let (d0, d12) = pair.endpoint_mismatch();
        assert_eq!(d0.amax(), 0.0);
        assert_eq!(d12.amax(), 0.0);
        assert!(pair.s12.junction_jump.amax() <= 1e-9);
    }

    #[test]
    fn pinned_junction_has_momentum_jump() {
        let (a, b) = (free(1.0), free(2.0));
        let r = composed_action_with_junction(&a, &b, &[0.0], &[0.9], &[1.0], 1.0, 1.0, Order::OneTwo, &opts())
            .unwrap();
        assert_abs_diff_eq!(r.junction_jump[0], 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(r.value(), 0.81 / 2.0 + 0.01, epsilon = 1e-10);
    }

    #[test]
    fn derivative_identities_series_free() {
        let (a, b) = (free(1.0), free(2.0));
        let r = composed_action_derivatives(&a, &b, &[0.0], &[1.0], 1.0, 1.0, Order::OneTwo, 1e-4, &opts())
            .unwrap();
        assert!(r.max_abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn derivative_identities_mixed_pair() {
        let (a, b) = (free(1.0), builtin("harmonic", &[]));
        for order in [Order::OneTwo, Order::TwoOne] {
            let r = composed_action_derivatives(&a, &b, &[0.2], &[-0.3], 0.6, 0.8, order, 1e-4, &opts())
                .unwrap();
            assert!(r.max_abs() < 1e-6, "{order:?} {r:?}");
        }
    }
}
