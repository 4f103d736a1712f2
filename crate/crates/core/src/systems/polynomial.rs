use nalgebra::{DMatrix, DVector};

use crate::numerics::ScalarField;

/// `coefficient · Π x_i^{exponents[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

/// A polynomial with exact first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    vars: usize,
    terms: Vec<Monomial>,
}

fn pow(x: f64, e: i64) -> f64 {
    if e < 0 {
        0.0
    } else {
        x.powi(e as i32)
    }
}

impl PolynomialField {
    /// Terms whose exponent list length differs from `vars` are rejected by
    /// returning `None`.
    pub fn new(vars: usize, terms: Vec<Monomial>) -> Option<Self> {
        if terms.iter().any(|t| t.exponents.len() != vars) {
            return None;
        }
        Some(Self { vars, terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    fn term_value(&self, t: &Monomial, x: &[f64], d1: Option<usize>, d2: Option<usize>) -> f64 {
        let mut v = t.coefficient;
        for (i, (&e, &xi)) in t.exponents.iter().zip(x).enumerate() {
            let mut e = e as i64;
            for d in [d1, d2].into_iter().flatten() {
                if d == i {
                    v *= e as f64;
                    e -= 1;
                }
            }
            if v == 0.0 {
                return 0.0;
            }
            v *= pow(xi, e);
        }
        v
    }
}

impl ScalarField for PolynomialField {
    fn dim(&self) -> usize {
        self.vars
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| self.term_value(t, x, None, None)).sum()
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.vars, |i, _| {
            self.terms
                .iter()
                .map(|t| self.term_value(t, x, Some(i), None))
                .sum()
        })
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.vars, self.vars, |i, j| {
            self.terms
                .iter()
                .map(|t| self.term_value(t, x, Some(i), Some(j)))
                .sum()
        })
    }
}
