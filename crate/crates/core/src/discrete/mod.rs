//! Implicit symplectic maps of discrete Lagrangians, corner equations of an
//! elementary square, and the discrete commutativity checks.
//!
//! Momenta follow `p0 = ∂Λ/∂q0(q0, q1)`, `p1 = −∂Λ/∂q1(q0, q1)`, so
//! `Λ = (q1−q0)²/(2h)` gives `(q, p) ↦ (q − h·p, p)`.

mod report;

pub use report::{
    discrete_commutativity_report, DiscreteOptions, DiscretePoint, DiscreteProbe, DiscreteReport,
};

use nalgebra::{DMatrix, DVector};

use crate::composition::Order;
use crate::error::{check_dim, Result};
use crate::numerics::{
    default_gradient_step, newton_solve, NewtonOptions, RootProblem, SolveDiagnostics, DEFAULT_TOL,
};
use crate::systems::{wrap_angle, DiscreteLagrangian};

#[derive(Debug, Clone)]
pub struct DiscreteMapResult {
    pub q_next: DVector<f64>,
    pub p_next: DVector<f64>,
    pub diag: SolveDiagnostics,
}

impl DiscreteMapResult {
    pub fn state(&self) -> DVector<f64> {
        DVector::from_iterator(
            2 * self.q_next.len(),
            self.q_next.iter().chain(self.p_next.iter()).copied(),
        )
    }
}

struct MapEquation<'a> {
    lambda: &'a DiscreteLagrangian,
    q0: &'a [f64],
    p0: &'a DVector<f64>,
}

impl RootProblem for MapEquation<'_> {
    fn residual(&self, q: &DVector<f64>) -> DVector<f64> {
        self.lambda.partials(self.q0, q.as_slice()).0 - self.p0
    }

    fn jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        self.lambda.hessian_blocks(self.q0, q.as_slice()).1
    }
}

fn solver_options() -> NewtonOptions {
    NewtonOptions {
        tol: DEFAULT_TOL,
        ..Default::default()
    }
    .polished()
}

/// One step of the map: solve `p0 = ∂Λ/∂q0(q0, q_next)` by Newton from
/// `q_guess` (default `q0`), then `p_next = −∂Λ/∂q1(q0, q_next)`.
pub fn discrete_map(
    lambda: &DiscreteLagrangian,
    q0: &[f64],
    p0: &[f64],
    q_guess: Option<&[f64]>,
) -> Result<DiscreteMapResult> {
    let n = lambda.dimension();
    check_dim(n, q0.len())?;
    check_dim(n, p0.len())?;
    let p = DVector::from_column_slice(p0);
    let guess = DVector::from_column_slice(q_guess.unwrap_or(q0));
    check_dim(n, guess.len())?;
    let eq = MapEquation { lambda, q0, p0: &p };
    let (q_next, diag) = newton_solve(&eq, guess, solver_options())?;
    let p_next = -lambda.partials(q0, q_next.as_slice()).1;
    Ok(DiscreteMapResult { q_next, p_next, diag })
}

struct CornerEquation<'a> {
    first: &'a DiscreteLagrangian,
    second: &'a DiscreteLagrangian,
    q0: &'a [f64],
    q12: &'a [f64],
}

impl RootProblem for CornerEquation<'_> {
    fn residual(&self, q: &DVector<f64>) -> DVector<f64> {
        self.first.partials(self.q0, q.as_slice()).1 + self.second.partials(q.as_slice(), self.q12).0
    }

    fn jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        self.first.hessian_blocks(self.q0, q.as_slice()).2 + self.second.hessian_blocks(q.as_slice(), self.q12).0
    }
}

/// Critical intermediate vertex for one order of composition.
#[derive(Debug, Clone)]
pub struct CornerPoint {
    pub q_mid: DVector<f64>,
    /// `Λ_first(q0, q_mid) + Λ_second(q_mid, q12)`
    pub value: f64,
    /// Residual of the solved corner equation.
    pub residual: DVector<f64>,
    /// `hessian_positive_definite` tells whether the critical point is a
    /// minimum.
    pub diag: SolveDiagnostics,
}

fn solve_one_corner(
    first: &DiscreteLagrangian,
    second: &DiscreteLagrangian,
    q0: &[f64],
    q12: &[f64],
    guess: DVector<f64>,
) -> Result<CornerPoint> {
    let eq = CornerEquation { first, second, q0, q12 };
    let (q_mid, mut diag) = newton_solve(&eq, guess, solver_options())?;
    diag.hessian_positive_definite = Some(eq.jacobian(&q_mid).cholesky().is_some());
    let residual = eq.residual(&q_mid);
    let value = first.eval(q0, q_mid.as_slice()) + second.eval(q_mid.as_slice(), q12);
    Ok(CornerPoint {
        q_mid,
        value,
        residual,
        diag,
    })
}

/// Both corners of the elementary square with residuals of all four corner
/// equations.
#[derive(Debug, Clone)]
pub struct CornerSolution {
    /// Vertex `q1` of `S12`: `Λ1` then `Λ2`.
    pub q1: CornerPoint,
    /// Vertex `q2` of `S21`: `Λ2` then `Λ1`.
    pub q2: CornerPoint,
    /// `∂Λ1(q0,q1)/∂q0 − ∂Λ2(q0,q2)/∂q0`
    pub e0: DVector<f64>,
    /// `∂Λ1(q2,q12)/∂q12 − ∂Λ2(q1,q12)/∂q12`
    pub e12: DVector<f64>,
}

impl CornerSolution {
    pub fn s12(&self) -> f64 {
        self.q1.value
    }

    pub fn s21(&self) -> f64 {
        self.q2.value
    }

    pub fn e1(&self) -> &DVector<f64> {
        &self.q1.residual
    }

    pub fn e2(&self) -> &DVector<f64> {
        &self.q2.residual
    }
}

fn midpoint(q0: &[f64], q12: &[f64]) -> DVector<f64> {
    DVector::from_iterator(q0.len(), q0.iter().zip(q12).map(|(a, b)| 0.5 * (a + b)))
}

/// Solve both corner equations from `q_guess` (default the midpoint of `q0`
/// and `q12`) and evaluate the two consequent ones.
pub fn solve_corner(
    l1: &DiscreteLagrangian,
    l2: &DiscreteLagrangian,
    q0: &[f64],
    q12: &[f64],
    q_guess: Option<&[f64]>,
) -> Result<CornerSolution> {
    let n = l1.dimension();
    check_dim(n, l2.dimension())?;
    check_dim(n, q0.len())?;
    check_dim(n, q12.len())?;
    let guess = match q_guess {
        Some(g) => {
            check_dim(n, g.len())?;
            DVector::from_column_slice(g)
        }
        None => midpoint(q0, q12),
    };
    let q1 = solve_one_corner(l1, l2, q0, q12, guess.clone())?;
    let q2 = solve_one_corner(l2, l1, q0, q12, guess)?;
    let e0 = l1.partials(q0, q1.q_mid.as_slice()).0 - l2.partials(q0, q2.q_mid.as_slice()).0;
    let e12 = l1.partials(q2.q_mid.as_slice(), q12).1 - l2.partials(q1.q_mid.as_slice(), q12).1;
    Ok(CornerSolution { q1, q2, e0, e12 })
}

/// `S12(q0, q12)` or `S21(q0, q12)` at the critical vertex reached from the
/// midpoint guess.
pub fn discrete_composed_action(
    l1: &DiscreteLagrangian,
    l2: &DiscreteLagrangian,
    q0: &[f64],
    q12: &[f64],
    order: Order,
) -> Result<CornerPoint> {
    check_dim(l1.dimension(), l2.dimension())?;
    check_dim(l1.dimension(), q0.len())?;
    check_dim(l1.dimension(), q12.len())?;
    let (first, second) = match order {
        Order::OneTwo => (l1, l2),
        Order::TwoOne => (l2, l1),
    };
    solve_one_corner(first, second, q0, q12, midpoint(q0, q12))
}

/// `S12(q0, q12) − S21(q0, q12)`
pub fn discrete_action_commutator(
    l1: &DiscreteLagrangian,
    l2: &DiscreteLagrangian,
    q0: &[f64],
    q12: &[f64],
) -> Result<f64> {
    let c = solve_corner(l1, l2, q0, q12, None)?;
    Ok(c.s12() - c.s21())
}

/// Residuals `(E0, E12)` at the solved corners.
pub fn corner_consistency_check(
    l1: &DiscreteLagrangian,
    l2: &DiscreteLagrangian,
    q0: &[f64],
    q12: &[f64],
) -> Result<(DVector<f64>, DVector<f64>)> {
    let c = solve_corner(l1, l2, q0, q12, None)?;
    Ok((c.e0, c.e12))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapCommutator {
    pub norm: f64,
    /// `F2(F1(q0, p0))`
    pub x_12: DVector<f64>,
    /// `F1(F2(q0, p0))`
    pub x_21: DVector<f64>,
}

/// Distance between phase points, with periodic coordinates compared modulo
/// `2π`.
fn phase_distance(l: &DiscreteLagrangian, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let n = l.dimension();
    (0..2 * n)
        .map(|i| {
            let d = a[i] - b[i];
            if i < n && l.space().is_periodic(i) {
                wrap_angle(d).abs()
            } else {
                d.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Compare `F2 ∘ F1` with `F1 ∘ F2` at `(q0, p0)`.
pub fn map_commutator(
    l1: &DiscreteLagrangian,
    l2: &DiscreteLagrangian,
    q0: &[f64],
    p0: &[f64],
) -> Result<MapCommutator> {
    check_dim(l1.dimension(), l2.dimension())?;
    let compose = |a: &DiscreteLagrangian, b: &DiscreteLagrangian| -> Result<DVector<f64>> {
        let mid = discrete_map(a, q0, p0, None)?;
        Ok(discrete_map(b, mid.q_next.as_slice(), mid.p_next.as_slice(), None)?.state())
    };
    let x_12 = compose(l1, l2)?;
    let x_21 = compose(l2, l1)?;
    Ok(MapCommutator {
        norm: phase_distance(l1, &x_12, &x_21),
        x_12,
        x_21,
    })
}

/// `‖DFᵀ J DF − J‖∞` with `DF` the central-difference Jacobian of the map at
/// `(q0, p0)`. Perturbed solves start from the unperturbed image so they
/// stay on its branch.
pub fn symplecticity_check(lambda: &DiscreteLagrangian, q0: &[f64], p0: &[f64]) -> Result<f64> {
    let n = lambda.dimension();
    let base = discrete_map(lambda, q0, p0, None)?;
    let guess = base.q_next.as_slice();
    let x0: Vec<f64> = q0.iter().chain(p0).copied().collect();
    let step = default_gradient_step();
    let mut df = DMatrix::zeros(2 * n, 2 * n);
    let mut y = x0.clone();
    for j in 0..2 * n {
        let h = step * x0[j].abs().max(1.0);
        let (hi, lo) = (x0[j] + h, x0[j] - h);
        y[j] = hi;
        let fp = discrete_map(lambda, &y[..n], &y[n..], Some(guess))?.state();
        y[j] = lo;
        let fm = discrete_map(lambda, &y[..n], &y[n..], Some(guess))?.state();
        y[j] = x0[j];
        df.set_column(j, &((fp - fm) / (hi - lo)));
    }
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    Ok((df.transpose() * &j * &df - j).amax())
}
