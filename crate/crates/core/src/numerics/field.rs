use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::{central_gradient, central_hessian, default_gradient_step, default_hessian_step};

/// A smooth real function on `R^m` with first and second derivatives.
///
/// Implementors that know their derivatives in closed form override
/// [`gradient`](ScalarField::gradient) and [`hessian`](ScalarField::hessian);
/// otherwise central finite differences of [`eval`](ScalarField::eval) are
/// used. A failed evaluation is reported as NaN, which every solver in the
/// crate checks for.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        central_gradient(|y| self.eval(y), x, default_gradient_step())
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        central_hessian(|y| self.eval(y), x, default_hessian_step())
    }
}

/// A field given only by a closure; derivatives are finite differences.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> ScalarField for FnField<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl<F> fmt::Debug for FnField<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("dim", &self.dim).finish()
    }
}
