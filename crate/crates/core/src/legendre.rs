//! Legendre transformation between Lagrangian and Hamiltonian descriptions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{newton_solve, NewtonOptions, RootProblem, ScalarField};
use crate::systems::{HamiltonianSystem, LagrangianSystem, VelocityGuess};

/// Threshold on `|det ∂²L/∂q̇²|` below which a point counts as degenerate.
pub const NONDEGENERACY_DET: f64 = 1e-10;

/// `p = ∂L/∂q̇(q, q̇)`.
pub fn momentum_of_velocity(l: &LagrangianSystem, q: &[f64], qdot: &[f64]) -> Result<DVector<f64>> {
    let n = l.dimension();
    check_dim(n, q.len())?;
    check_dim(n, qdot.len())?;
    let p = l.gradient(q, qdot).rows(n, n).into_owned();
    match p.iter().position(|v| !v.is_finite()) {
        Some(component) => Err(Error::NonFinite { component }),
        None => Ok(p),
    }
}

struct VelocityEquation<'a> {
    l: &'a LagrangianSystem,
    q: &'a [f64],
    p: &'a [f64],
}

impl RootProblem for VelocityEquation<'_> {
    fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.l.dimension();
        let g = self.l.gradient(self.q, v.as_slice());
        DVector::from_fn(n, |i, _| g[n + i] - self.p[i])
    }

    fn jacobian(&self, v: &DVector<f64>) -> DMatrix<f64> {
        velocity_hessian(self.l, self.q, v.as_slice())
    }
}

fn velocity_hessian(l: &LagrangianSystem, q: &[f64], qdot: &[f64]) -> DMatrix<f64> {
    let n = l.dimension();
    l.hessian(q, qdot).view((n, n), (n, n)).into_owned()
}

/// The system's preferred starting point for inverting the Legendre map.
pub fn default_velocity_guess(l: &LagrangianSystem, p: &[f64]) -> DVector<f64> {
    match l.velocity_guess() {
        VelocityGuess::Zero => DVector::zeros(p.len()),
        VelocityGuess::Momentum => DVector::from_column_slice(p),
    }
}

/// Local inverse of the Legendre map: the `q̇` near `guess` with
/// `∂L/∂q̇(q, q̇) = p`.
pub fn velocity_of_momentum(
    l: &LagrangianSystem,
    q: &[f64],
    p: &[f64],
    guess: &[f64],
) -> Result<DVector<f64>> {
    let n = l.dimension();
    check_dim(n, q.len())?;
    check_dim(n, p.len())?;
    check_dim(n, guess.len())?;
    let scale = 1.0 + p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let opts = NewtonOptions {
        tol: 1e-12 * scale,
        ..NewtonOptions::default()
    }
    .polished();
    let (v, _) = newton_solve(&VelocityEquation { l, q, p }, DVector::from_column_slice(guess), opts)?;
    Ok(v)
}

/// `H(q, p) = ⟨p, q̇(q,p)⟩ − L(q, q̇(q,p))`; derivatives by finite differences
/// of the whole transform.
struct LegendreHamiltonianField {
    lagrangian: LagrangianSystem,
}

impl ScalarField for LegendreHamiltonianField {
    fn dim(&self) -> usize {
        2 * self.lagrangian.dimension()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let (q, p) = x.split_at(self.lagrangian.dimension());
        let guess = default_velocity_guess(&self.lagrangian, p);
        match velocity_of_momentum(&self.lagrangian, q, p, guess.as_slice()) {
            Ok(v) => {
                let pv: f64 = p.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                pv - self.lagrangian.eval(q, v.as_slice())
            }
            Err(_) => f64::NAN,
        }
    }
}

/// The Hamiltonian of a non-degenerate Lagrangian.
pub fn hamiltonian_of(l: &LagrangianSystem) -> HamiltonianSystem {
    let field = LegendreHamiltonianField { lagrangian: l.clone() };
    HamiltonianSystem::new(format!("H[{}]", l.name()), l.space().clone(), Arc::new(field))
        .expect("Legendre field has dimension 2n")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondegeneracy {
    pub det: f64,
    pub ok: bool,
}

/// Determinant of `∂²L/∂q̇∂q̇`; `ok` also requires the point to lie in the
/// Lagrangian's domain.
pub fn check_nondegeneracy(l: &LagrangianSystem, q: &[f64], qdot: &[f64]) -> Nondegeneracy {
    let det = velocity_hessian(l, q, qdot).determinant();
    let ok = l.in_domain(q, qdot) && det.is_finite() && det.abs() > NONDEGENERACY_DET;
    Nondegeneracy { det, ok }
}

/// A Lagrangian together with its Legendre-transformed Hamiltonian.
#[derive(Debug, Clone)]
pub struct LegendrePair {
    pub lagrangian: LagrangianSystem,
    pub hamiltonian: HamiltonianSystem,
}

impl LegendrePair {
    pub fn new(lagrangian: LagrangianSystem) -> Self {
        let hamiltonian = hamiltonian_of(&lagrangian);
        Self { lagrangian, hamiltonian }
    }

    /// `H(q, p(q,q̇)) + L(q, q̇) − ⟨p(q,q̇), q̇⟩`.
    pub fn identity_residual(&self, q: &[f64], qdot: &[f64]) -> Result<f64> {
        let p = momentum_of_velocity(&self.lagrangian, q, qdot)?;
        let pv = p.dot(&DVector::from_column_slice(qdot));
        Ok(self.hamiltonian.eval(q, p.as_slice()) + self.lagrangian.eval(q, qdot) - pv)
    }
}
