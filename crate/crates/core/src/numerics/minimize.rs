use nalgebra::{DMatrix, DVector};

use super::{inf_norm, ScalarField, SolveDiagnostics, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub argmin: DVector<f64>,
    pub value: f64,
    pub diag: SolveDiagnostics,
}

/// Whether a symmetric matrix is positive definite with margin.
///
/// The smallest eigenvalue must exceed `sqrt(tol)·max(1, max|λ|)`; below that
/// the curvature cannot be separated from the gradient tolerance.
fn certified_positive_definite(h: &DMatrix<f64>, tol: f64) -> bool {
    if h.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let eig = h.clone().symmetric_eigenvalues();
    let scale = eig.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    eig.min() > tol.sqrt() * scale
}

/// Newton minimization with eigenvalue-modified Hessian and Armijo
/// backtracking.
///
/// Converges to a stationary point with `‖∇f‖∞ ≤ tol`. Whether that point is
/// a nondegenerate minimum is recorded in
/// `diag.hessian_positive_definite`; saddles and degenerate minima are
/// returned with the flag false.
pub fn minimize(
    field: &dyn ScalarField,
    x0: &[f64],
    opts: MinimizeOptions,
) -> Result<Minimum> {
    let mut x = DVector::from_column_slice(x0);
    let mut f = field.eval(x.as_slice());
    let mut g = field.gradient(x.as_slice());
    if !f.is_finite() {
        return Err(Error::NonFinite { component: 0 });
    }
    if let Some(component) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { component });
    }

    let mut iterations = 0;
    while inf_norm(g.as_slice()) > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NotConverged {
                best: x.as_slice().to_vec(),
                residual: inf_norm(g.as_slice()),
                iterations,
            });
        }
        let h = field.hessian(x.as_slice());
        let h = (&h + h.transpose()) * 0.5;
        let eig = h.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
        let floor = 1e-8 * scale;
        let vt_g = eig.eigenvectors.transpose() * &g;
        let scaled = DVector::from_fn(vt_g.len(), |i, _| {
            vt_g[i] / eig.eigenvalues[i].abs().max(floor)
        });
        let d = -(&eig.eigenvectors * scaled);

        let slope = g.dot(&d);
        let g_norm = g.norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xn = &x + alpha * &d;
            let fn_ = field.eval(xn.as_slice());
            if fn_.is_finite() && fn_ <= f + 1e-4 * alpha * slope {
                accepted = Some((xn, fn_));
                break;
            }
            alpha *= 0.5;
        }
        // Near the optimum the decrease drops below round-off in f; accept
        // the full step if it still reduces the gradient.
        let (xn, fn_) = match accepted {
            Some(step) => step,
            None => {
                let xn = &x + &d;
                let gn = field.gradient(xn.as_slice());
                if gn.norm() < g_norm {
                    let fn_ = field.eval(xn.as_slice());
                    (xn, fn_)
                } else {
                    return Err(Error::NotConverged {
                        best: x.as_slice().to_vec(),
                        residual: inf_norm(g.as_slice()),
                        iterations,
                    });
                }
            }
        };
        x = xn;
        f = fn_;
        g = field.gradient(x.as_slice());
        if let Some(component) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { component });
        }
        iterations += 1;
    }

    let h = field.hessian(x.as_slice());
    let h = (&h + h.transpose()) * 0.5;
    Ok(Minimum {
        value: f,
        diag: SolveDiagnostics {
            iterations,
            final_residual_norm: inf_norm(g.as_slice()),
            converged: true,
            hessian_positive_definite: Some(certified_positive_definite(&h, opts.tol)),
        },
        argmin: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::FnField;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shifted_parabola() {
        let f = FnField::new(1, |x: &[f64]| (x[0] - 1.0).powi(2));
        let m = minimize(&f, &[0.0], MinimizeOptions::default()).unwrap();
        assert_abs_diff_eq!(m.argmin[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-15);
        assert_eq!(m.diag.hessian_positive_definite, Some(true));
    }

    #[test]
    fn two_spring_junction() {
        let f = FnField::new(1, |x: &[f64]| x[0] * x[0] / 2.0 + (x[0] - 1.0).powi(2) / 2.0);
        let m = minimize(&f, &[0.0], MinimizeOptions::default()).unwrap();
        assert_abs_diff_eq!(m.argmin[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(m.value, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn quartic_minimum_is_flagged_degenerate() {
        let f = FnField::new(1, |x: &[f64]| x[0].powi(4));
        let m = minimize(&f, &[0.1], MinimizeOptions::default()).unwrap();
        assert_abs_diff_eq!(m.argmin[0], 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-12);
        assert_eq!(m.diag.hessian_positive_definite, Some(false));
        assert!(m.diag.final_residual_norm <= 1e-10);
    }

    #[test]
    fn saddle_is_flagged_not_hidden() {
        // Starting exactly on the stable manifold of a saddle lands on it.
        let f = FnField::new(2, |x: &[f64]| x[0] * x[0] - x[1] * x[1]);
        let m = minimize(&f, &[0.3, 0.0], MinimizeOptions::default()).unwrap();
        assert_eq!(m.diag.hessian_positive_definite, Some(false));
    }

    #[test]
    fn rosenbrock() {
        let f = FnField::new(2, |x: &[f64]| {
            (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
        });
        let m = minimize(&f, &[-1.2, 1.0], MinimizeOptions { tol: 1e-7, max_iter: 200 }).unwrap();
        assert_abs_diff_eq!(m.argmin[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(m.argmin[1], 1.0, epsilon = 1e-5);
    }
}
