//! Differentiation contract, Newton root finding and smooth minimization.
//!
//! Everything here is a pure function of its inputs. Vectors are
//! `nalgebra::DVector<f64>`; inputs are taken as slices so callers can pass
//! either owned vectors or plain arrays.

mod fd;
mod field;
mod minimize;
mod newton;

pub use fd::{central_gradient, central_hessian, fd_gradient, fd_jacobian};
pub use field::{FnField, ScalarField};
pub use minimize::{minimize, MinimizeOptions, Minimum};
pub use newton::{newton_solve, NewtonOptions, RootProblem};

use serde::Serialize;

/// Default tolerance on gradient and residual infinity norms.
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Jacobians with a condition estimate above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// `eps^(1/3)`, the truncation/round-off balance for central first differences.
pub fn default_gradient_step() -> f64 {
    f64::EPSILON.cbrt()
}

/// `eps^(1/4)`, the balance for second differences built from values.
pub fn default_hessian_step() -> f64 {
    f64::EPSILON.sqrt().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
    pub hessian_positive_definite: Option<bool>,
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
