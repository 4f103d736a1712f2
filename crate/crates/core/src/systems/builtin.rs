use nalgebra::{DMatrix, DVector};

use super::wrap_angle;
use crate::numerics::ScalarField;

/// `L = m|q̇|²/2 − mω²|q|²/2` on `R^n`; `ω = 0` is the free particle.
#[derive(Debug, Clone)]
pub struct QuadraticLagrangianField {
    n: usize,
    mass: f64,
    omega: f64,
}

impl QuadraticLagrangianField {
    pub fn new(n: usize, mass: f64, omega: f64) -> Self {
        Self { n, mass, omega }
    }

    fn stiffness(&self) -> f64 {
        self.mass * self.omega * self.omega
    }
}

impl ScalarField for QuadraticLagrangianField {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let (q, v) = x.split_at(self.n);
        let kinetic: f64 = v.iter().map(|v| v * v).sum();
        let potential: f64 = q.iter().map(|q| q * q).sum();
        0.5 * self.mass * kinetic - 0.5 * self.stiffness() * potential
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let k = self.stiffness();
        DVector::from_fn(2 * self.n, |i, _| {
            if i < self.n {
                -k * x[i]
            } else {
                self.mass * x[i]
            }
        })
    }

    fn hessian(&self, _x: &[f64]) -> DMatrix<f64> {
        let k = self.stiffness();
        DMatrix::from_fn(2 * self.n, 2 * self.n, |i, j| match (i == j, i < self.n) {
            (true, true) => -k,
            (true, false) => self.mass,
            _ => 0.0,
        })
    }
}

/// `L = (3/4) Σ |q̇_i|^{4/3}`, whose momentum is the cube root of the
/// velocity.
#[derive(Debug, Clone)]
pub struct QuarticKineticField {
    n: usize,
}

impl QuarticKineticField {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl ScalarField for QuarticKineticField {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x[self.n..]
            .iter()
            .map(|v| 0.75 * v.abs().powf(4.0 / 3.0))
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_fn(2 * self.n, |i, _| if i < self.n { 0.0 } else { x[i].cbrt() })
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(2 * self.n, 2 * self.n, |i, j| {
            if i == j && i >= self.n {
                x[i].abs().powf(-2.0 / 3.0) / 3.0
            } else {
                0.0
            }
        })
    }
}

/// `Λ = |q1 − q0|²/(2h) + K Σ cos(q1_i)`; periodic components of the
/// difference are reduced to (−π, π]. `K = 0` is the discrete free particle.
#[derive(Debug, Clone)]
pub struct DiscreteQuadraticField {
    periodic: Vec<bool>,
    h: f64,
    kick: f64,
}

impl DiscreteQuadraticField {
    pub fn new(periodic: Vec<bool>, h: f64, kick: f64) -> Self {
        Self { periodic, h, kick }
    }

    fn n(&self) -> usize {
        self.periodic.len()
    }

    fn difference(&self, x: &[f64], i: usize) -> f64 {
        let d = x[self.n() + i] - x[i];
        if self.periodic[i] {
            wrap_angle(d)
        } else {
            d
        }
    }
}

impl ScalarField for DiscreteQuadraticField {
    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let d = self.difference(x, i);
                d * d / (2.0 * self.h) + self.kick * x[n + i].cos()
            })
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                -self.difference(x, i) / self.h
            } else {
                let k = i - n;
                self.difference(x, k) / self.h - self.kick * x[i].sin()
            }
        })
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let inv_h = 1.0 / self.h;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i % n != j % n {
                0.0
            } else if i == j && i >= n {
                inv_h - self.kick * x[i].cos()
            } else if i == j {
                inv_h
            } else {
                -inv_h
            }
        })
    }
}
