//! Minimizing trajectories, principal action functions, Hamiltonian flows,
//! and the Euler–Lagrange and Hamilton–Jacobi identities.
//!
//! Actions are computed from the midpoint-rule discrete action, which is
//! second order in the step; [`principal_action`] Richardson-extrapolates
//! pairs of resolutions `N, 2N` and refines until the estimate meets the
//! target.

mod flow;
pub(crate) mod glued;

pub use flow::{integrate_flow, PhasePath};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::numerics::{SolveDiagnostics, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::systems::{HamiltonianSystem, LagrangianSystem};
use glued::{GluedAction, GluedSolution, Piece, SolverOptions};

/// Finest resolution `principal_action` will try.
pub const MAX_RESOLUTION: usize = 1 << 14;

/// A time-discretized trajectory. `switch_nodes` are the node indices where
/// the active Lagrangian changes; steps are uniform between them.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    pub times: Vec<f64>,
    pub points: Vec<DVector<f64>>,
    pub switch_nodes: Vec<usize>,
}

impl DiscretePath {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct ActionResult {
    /// Critical value of the action (extrapolated when produced by
    /// [`principal_action`]).
    pub value: f64,
    pub path: DiscretePath,
    pub p_start: DVector<f64>,
    pub p_end: DVector<f64>,
    pub diag: SolveDiagnostics,
    /// Number of steps of the finest discretization used.
    pub resolution: usize,
    /// Zero for a single-resolution solve.
    pub error_estimate: f64,
}

impl ActionResult {
    /// False when the critical path is a saddle of the discrete action.
    pub fn is_minimum(&self) -> bool {
        self.diag.hessian_positive_definite.unwrap_or(false)
    }

    fn from_solution(sol: GluedSolution) -> Self {
        let resolution = sol.path.steps();
        Self {
            value: sol.value,
            path: sol.path,
            p_start: sol.p_start,
            p_end: sol.p_end,
            diag: sol.diag,
            resolution,
            error_estimate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ActionOptions {
    /// Richardson error estimate at which refinement stops.
    pub target_tol: f64,
    /// Newton tolerance on the discrete Euler–Lagrange residual.
    pub solver_tol: f64,
    pub max_iter: usize,
    /// Coarse resolution of the first Richardson pair.
    pub initial_resolution: usize,
    pub max_resolution: usize,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self {
            target_tol: 1e-8,
            solver_tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            initial_resolution: 32,
            max_resolution: MAX_RESOLUTION,
        }
    }
}

impl ActionOptions {
    pub fn with_target(mut self, target_tol: f64) -> Self {
        self.target_tol = target_tol;
        self
    }

    pub(crate) fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tol,
            max_iter: self.max_iter,
        }
    }
}

pub(crate) fn check_horizon(l: &LagrangianSystem, t: f64) -> Result<()> {
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be positive, got {t}")));
    }
    match l.horizon() {
        Some(horizon) if t >= horizon => Err(Error::HorizonExceeded {
            system: l.name().to_string(),
            time: t,
            horizon,
        }),
        _ => Ok(()),
    }
}

fn solve_single(
    l: &LagrangianSystem,
    qa: &[f64],
    qb: &[f64],
    t: f64,
    steps: usize,
    solver: SolverOptions,
) -> Result<GluedSolution> {
    check_horizon(l, t)?;
    let glued = GluedAction::new(&[Piece {
        lagrangian: l,
        duration: t,
        steps,
    }])?;
    glued.solve(qa, qb, solver)
}

/// Critical discrete action between fixed endpoints at resolution `steps`.
///
/// A critical path that is not a minimum is returned with
/// `diag.hessian_positive_definite = Some(false)`.
pub fn minimize_action(
    l: &LagrangianSystem,
    qa: &[f64],
    qb: &[f64],
    t: f64,
    steps: usize,
) -> Result<ActionResult> {
    let opts = ActionOptions::default();
    solve_single(l, qa, qb, t, steps, opts.solver()).map(ActionResult::from_solution)
}

/// Combine solutions at `N` and `2N`: `(4·S_{2N} − S_N)/3` for the value and
/// boundary momenta, with error estimate `|S_{2N} − S_N|/3` plus a round-off
/// floor.
pub(crate) fn richardson(coarse: &GluedSolution, fine: GluedSolution) -> ActionResult {
    let extrapolate = |c: f64, f: f64| (4.0 * f - c) / 3.0;
    let roundoff = 4.0 * fine.path.steps() as f64 * f64::EPSILON * fine.magnitude.max(1.0);
    let diag = SolveDiagnostics {
        iterations: coarse.diag.iterations + fine.diag.iterations,
        final_residual_norm: coarse.diag.final_residual_norm.max(fine.diag.final_residual_norm),
        converged: coarse.diag.converged && fine.diag.converged,
        hessian_positive_definite: match (
            coarse.diag.hessian_positive_definite,
            fine.diag.hessian_positive_definite,
        ) {
            (Some(a), Some(b)) => Some(a && b),
            _ => None,
        },
    };
    ActionResult {
        value: extrapolate(coarse.value, fine.value),
        p_start: coarse.p_start.zip_map(&fine.p_start, extrapolate),
        p_end: coarse.p_end.zip_map(&fine.p_end, extrapolate),
        error_estimate: (fine.value - coarse.value).abs() / 3.0 + roundoff,
        resolution: fine.path.steps(),
        diag,
        path: fine.path,
    }
}

/// Richardson pair at a fixed coarse resolution.
pub fn richardson_action(
    l: &LagrangianSystem,
    qa: &[f64],
    qb: &[f64],
    t: f64,
    coarse_steps: usize,
    opts: &ActionOptions,
) -> Result<ActionResult> {
    let coarse = solve_single(l, qa, qb, t, coarse_steps, opts.solver())?;
    let fine = solve_single(l, qa, qb, t, 2 * coarse_steps, opts.solver())?;
    Ok(richardson(&coarse, fine))
}

/// Refine a Richardson pair, doubling the coarse resolution, until its
/// error estimate is within `opts.target_tol`.
pub(crate) fn refine_until<T, F>(
    opts: &ActionOptions,
    action: impl Fn(&T) -> &ActionResult,
    into_best: impl FnOnce(T) -> ActionResult,
    mut pair: F,
) -> Result<T>
where
    F: FnMut(usize) -> Result<T>,
{
    let mut n = opts.initial_resolution.max(2);
    loop {
        let result = pair(n)?;
        if action(&result).error_estimate <= opts.target_tol {
            return Ok(result);
        }
        if 4 * n > opts.max_resolution {
            return Err(Error::ResolutionCapExceeded {
                best: Box::new(into_best(result)),
            });
        }
        n *= 2;
    }
}

/// Principal action function `S(q_a, q_b, t)`.
pub fn principal_action(
    l: &LagrangianSystem,
    qa: &[f64],
    qb: &[f64],
    t: f64,
    opts: &ActionOptions,
) -> Result<ActionResult> {
    check_horizon(l, t)?;
    refine_until(opts, |r| r, |r| r, |n| richardson_action(l, qa, qb, t, n, opts))
}

/// Infinity norm of the discrete Euler–Lagrange expression over interior
/// nodes.
pub fn euler_lagrange_residual(l: &LagrangianSystem, path: &DiscretePath) -> Result<f64> {
    let glued = GluedAction::from_path(l, path)?;
    Ok(glued
        .interior_gradient(&path.points)
        .iter()
        .fold(0.0_f64, |m, g| m.max(g.amax())))
}

#[derive(Debug, Clone)]
pub struct HjResiduals {
    /// `∂S/∂q_a + p_start`
    pub res_qa: DVector<f64>,
    /// `∂S/∂q_b − p_end`
    pub res_qb: DVector<f64>,
    /// `∂S/∂t + H(q_b, p_end)`
    pub res_t: f64,
}

impl HjResiduals {
    pub fn max_abs(&self) -> f64 {
        self.res_qa.amax().max(self.res_qb.amax()).max(self.res_t.abs())
    }
}

/// Central difference of `f` in one scalar argument.
pub(crate) fn central_difference<F>(x: f64, step: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = step * x.abs().max(1.0);
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

/// Hamilton–Jacobi residuals of the principal action.
///
/// The resolution is fixed by a first [`principal_action`] call; the partial
/// derivatives are central differences of the Richardson value at that same
/// resolution, so discretization error stays a smooth function of the
/// arguments.
pub fn hj_check(
    l: &LagrangianSystem,
    h: &HamiltonianSystem,
    qa: &[f64],
    qb: &[f64],
    t: f64,
    fd_step: f64,
    opts: &ActionOptions,
) -> Result<HjResiduals> {
    let n = l.dimension();
    check_dim(n, qa.len())?;
    check_dim(n, qb.len())?;
    let base = principal_action(l, qa, qb, t, opts)?;
    let coarse = base.resolution / 2;
    let s = |qa: &[f64], qb: &[f64], t: f64| -> Result<f64> {
        Ok(richardson_action(l, qa, qb, t, coarse, opts)?.value)
    };
    let partial = |point: &[f64], i: usize, eval: &dyn Fn(&[f64]) -> Result<f64>| {
        central_difference(point[i], fd_step, |xi| {
            let mut p = point.to_vec();
            p[i] = xi;
            eval(&p)
        })
    };

    let mut res_qa = DVector::zeros(n);
    let mut res_qb = DVector::zeros(n);
    for i in 0..n {
        res_qa[i] = partial(qa, i, &|p| s(p, qb, t))? + base.p_start[i];
        res_qb[i] = partial(qb, i, &|p| s(qa, p, t))? - base.p_end[i];
    }
    let ds_dt = central_difference(t, fd_step, |t| s(qa, qb, t))?;
    let res_t = ds_dt + h.eval(qb, base.p_end.as_slice());
    Ok(HjResiduals {
        res_qa,
        res_qb,
        res_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::hamiltonian_of;
    use crate::systems::{catalog_lookup, SystemSpec};
    use approx::assert_abs_diff_eq;

    fn builtin(name: &str, params: &[(&str, f64)]) -> LagrangianSystem {
        catalog_lookup(&SystemSpec::builtin(name, params)).unwrap().into_continuous().unwrap()
    }

    /// Closed-form oscillator action, the independent oracle.
    fn oscillator_action(qa: f64, qb: f64, t: f64) -> f64 {
        ((qa * qa + qb * qb) * t.cos() - 2.0 * qa * qb) / (2.0 * t.sin())
    }

    #[test]
    fn free_particle_action() {
        let l = builtin("free_particle", &[]);
        let r = minimize_action(&l, &[0.0], &[1.0], 1.0, 16).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.p_start[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.p_end[0], 1.0, epsilon = 1e-13);
        assert!(r.is_minimum());
    }

    #[test]
    fn equilibrium_rest() {
        let l = builtin("harmonic", &[]);
        let r = minimize_action(&l, &[0.0], &[0.0], 1.0, 10).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.path.points.iter().all(|p| p[0] == 0.0));
    }

    #[test]
    fn quarter_period_action_vanishes() {
        let l = builtin("harmonic", &[]);
        let r = minimize_action(&l, &[0.0], &[1.0], std::f64::consts::FRAC_PI_2, 200).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 2e-4);
    }

    #[test]
    fn principal_actions() {
        let opts = ActionOptions::default();
        let free = builtin("free_particle", &[]);
        let r = principal_action(&free, &[0.0], &[1.0], 1.0, &opts.with_target(1e-10)).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-12);

        let heavy = builtin("free_particle", &[("mass", 2.0)]);
        let r = principal_action(&heavy, &[0.0], &[1.0], 1.0, &opts.with_target(1e-10)).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);

        let osc = builtin("harmonic", &[]);
        let r = principal_action(&osc, &[0.0], &[1.0], 1.0, &opts.with_target(1e-8)).unwrap();
        assert_abs_diff_eq!(r.value, oscillator_action(0.0, 1.0, 1.0), epsilon = 1e-9);
        assert!(r.error_estimate <= 1e-8);
    }

    #[test]
    fn horizon_guard() {
        let osc = builtin("harmonic", &[]);
        let err = minimize_action(&osc, &[0.0], &[1.0], 3.0, 100).unwrap_err();
        assert!(matches!(err, Error::HorizonExceeded { .. }));
    }

    #[test]
    fn resolution_cap_carries_best() {
        let osc = builtin("harmonic", &[]);
        let opts = ActionOptions {
            target_tol: 1e-30,
            max_resolution: 128,
            ..Default::default()
        };
        match principal_action(&osc, &[0.0], &[1.0], 1.0, &opts) {
            Err(Error::ResolutionCapExceeded { best }) => {
                assert!(best.resolution <= 128);
                assert_abs_diff_eq!(best.value, oscillator_action(0.0, 1.0, 1.0), epsilon = 1e-7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn euler_lagrange_residuals() {
        let free = builtin("free_particle", &[]);
        let straight = minimize_action(&free, &[0.0], &[1.0], 1.0, 10).unwrap().path;
        assert!(euler_lagrange_residual(&free, &straight).unwrap() <= 1e-12);

        let mut bent = straight.clone();
        bent.points[4][0] += 0.1;
        assert!(euler_lagrange_residual(&free, &bent).unwrap() > 1e-2);

        let osc = builtin("harmonic", &[]);
        let r = minimize_action(&osc, &[0.2], &[-0.4], 1.2, 64).unwrap();
        assert!(euler_lagrange_residual(&osc, &r.path).unwrap() <= DEFAULT_TOL);
    }

    #[test]
    fn hj_free_particle() {
        let free = builtin("free_particle", &[]);
        let h = hamiltonian_of(&free);
        let r = hj_check(&free, &h, &[0.0], &[1.0], 1.0, 1e-4, &ActionOptions::default()).unwrap();
        assert!(r.max_abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn hj_equilibrium() {
        let osc = builtin("harmonic", &[]);
        let h = hamiltonian_of(&osc);
        let r = hj_check(&osc, &h, &[0.0], &[0.0], 1.0, 1e-4, &ActionOptions::default()).unwrap();
        assert!(r.max_abs() < 1e-8, "{r:?}");
    }
}
