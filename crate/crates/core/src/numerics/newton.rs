use nalgebra::{DMatrix, DVector};

use super::{
    default_gradient_step, fd_jacobian, inf_norm, SolveDiagnostics, DEFAULT_MAX_ITER, DEFAULT_TOL,
    SINGULAR_CONDITION,
};
use crate::error::{Error, Result};

/// A square nonlinear system `F(x) = 0`.
pub trait RootProblem {
    fn residual(&self, x: &DVector<f64>) -> DVector<f64>;

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        fd_jacobian(
            |y| self.residual(&DVector::from_column_slice(y)),
            x.as_slice(),
            default_gradient_step(),
        )
    }
}

impl<F> RootProblem for F
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        self(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Take one extra Newton step after convergence, kept only if it does
    /// not increase the residual. Inner solves that are later differenced
    /// use this to push the root to round-off.
    pub polish: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            polish: false,
        }
    }
}

impl NewtonOptions {
    pub fn polished(mut self) -> Self {
        self.polish = true;
        self
    }
}

fn first_non_finite(v: &DVector<f64>) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

fn condition_estimate(jac: &DMatrix<f64>) -> f64 {
    if jac.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let sv = jac.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn newton_step(jac: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    let condition = condition_estimate(jac);
    if condition > SINGULAR_CONDITION {
        return Err(Error::SingularJacobian { condition });
    }
    jac.clone()
        .lu()
        .solve(&(-r))
        .ok_or(Error::SingularJacobian { condition })
}

/// Damped Newton iteration for `F(x) = 0`.
///
/// Steps are halved until the Euclidean residual decreases sufficiently, so
/// a concave residual such as a cube root cannot throw the iterate across
/// the root indefinitely.
pub fn newton_solve<P: RootProblem + ?Sized>(
    problem: &P,
    x0: DVector<f64>,
    opts: NewtonOptions,
) -> Result<(DVector<f64>, SolveDiagnostics)> {
    let mut x = x0;
    let mut r = problem.residual(&x);
    if let Some(component) = first_non_finite(&r) {
        return Err(Error::NonFinite { component });
    }
    let mut iterations = 0;
    while inf_norm(r.as_slice()) > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NotConverged {
                best: x.as_slice().to_vec(),
                residual: inf_norm(r.as_slice()),
                iterations,
            });
        }
        let d = newton_step(&problem.jacobian(&x), &r)?;
        let r_norm = r.norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn = &x + alpha * &d;
            let rn = problem.residual(&xn);
            if first_non_finite(&rn).is_none() && rn.norm() <= (1.0 - 1e-4 * alpha) * r_norm {
                accepted = Some((xn, rn));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((xn, rn)) => {
                x = xn;
                r = rn;
            }
            None => {
                return Err(Error::NotConverged {
                    best: x.as_slice().to_vec(),
                    residual: inf_norm(r.as_slice()),
                    iterations,
                })
            }
        }
    }

    if opts.polish && r.iter().any(|&v| v != 0.0) {
        if let Ok(d) = newton_step(&problem.jacobian(&x), &r) {
            let xn = &x + d;
            let rn = problem.residual(&xn);
            if first_non_finite(&rn).is_none() && inf_norm(rn.as_slice()) <= inf_norm(r.as_slice())
            {
                x = xn;
                r = rn;
            }
        }
    }

    let diag = SolveDiagnostics {
        iterations,
        final_residual_norm: inf_norm(r.as_slice()),
        converged: true,
        hessian_positive_definite: None,
    };
    Ok((x, diag))
}
