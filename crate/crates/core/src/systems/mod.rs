//! Continuous Lagrangians, Hamiltonians and discrete Lagrangians over flat
//! configuration spaces, plus the built-in catalog.

mod builtin;
mod polynomial;
mod spec;

pub use builtin::{DiscreteQuadraticField, QuadraticLagrangianField, QuarticKineticField};
pub use polynomial::{Monomial, PolynomialField};
pub use spec::{catalog, catalog_lookup, parse_system_spec, CatalogEntry, CatalogKind, SpecKind, SystemSpec};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::numerics::ScalarField;

/// `R^n` with optionally periodic (period 2π) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    periodic: Vec<bool>,
}

impl ConfigSpace {
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::with_periodic(vec![false; n])
    }

    pub fn with_periodic(periodic: Vec<bool>) -> Result<Self> {
        if periodic.is_empty() {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(Self { periodic })
    }

    pub fn dimension(&self) -> usize {
        self.periodic.len()
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn is_periodic(&self, i: usize) -> bool {
        self.periodic[i]
    }

    /// `b − a`, with periodic components reduced to (−π, π].
    pub fn displacement(&self, a: &[f64], b: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.dimension(), |i, _| {
            let d = b[i] - a[i];
            if self.periodic[i] {
                wrap_angle(d)
            } else {
                d
            }
        })
    }
}

/// Representative of `x` modulo 2π in (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Where a Lagrangian may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Everywhere,
    /// Every velocity component must satisfy `|q̇_i| ≥` the bound.
    MinAbsVelocity(f64),
}

/// Initial guess used when inverting the Legendre map without an explicit
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityGuess {
    Zero,
    /// `q̇ = p`, the unit-mass guess.
    Momentum,
}

/// `L(q, q̇)` stored as a field over the concatenation `(q, q̇) ∈ R^{2n}`.
#[derive(Clone)]
pub struct LagrangianSystem {
    name: String,
    space: ConfigSpace,
    field: Arc<dyn ScalarField>,
    domain: Domain,
    horizon: Option<f64>,
    velocity_guess: VelocityGuess,
}

impl LagrangianSystem {
    pub fn new(name: impl Into<String>, space: ConfigSpace, field: Arc<dyn ScalarField>) -> Result<Self> {
        check_dim(2 * space.dimension(), field.dim())?;
        Ok(Self {
            name: name.into(),
            space,
            field,
            domain: Domain::Everywhere,
            horizon: None,
            velocity_guess: VelocityGuess::Zero,
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Refuse action solves over times at or beyond `horizon`.
    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn with_velocity_guess(mut self, guess: VelocityGuess) -> Self {
        self.velocity_guess = guess;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn field(&self) -> &Arc<dyn ScalarField> {
        &self.field
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn horizon(&self) -> Option<f64> {
        self.horizon
    }

    pub fn velocity_guess(&self) -> VelocityGuess {
        self.velocity_guess
    }

    pub fn in_domain(&self, _q: &[f64], qdot: &[f64]) -> bool {
        match self.domain {
            Domain::Everywhere => true,
            Domain::MinAbsVelocity(min) => qdot.iter().all(|v| v.abs() >= min),
        }
    }

    fn pack(q: &[f64], qdot: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(q.len() + qdot.len());
        x.extend_from_slice(q);
        x.extend_from_slice(qdot);
        x
    }

    pub fn eval(&self, q: &[f64], qdot: &[f64]) -> f64 {
        self.field.eval(&Self::pack(q, qdot))
    }

    /// Full gradient `(∂L/∂q, ∂L/∂q̇)`.
    pub fn gradient(&self, q: &[f64], qdot: &[f64]) -> DVector<f64> {
        self.field.gradient(&Self::pack(q, qdot))
    }

    pub fn hessian(&self, q: &[f64], qdot: &[f64]) -> DMatrix<f64> {
        self.field.hessian(&Self::pack(q, qdot))
    }
}

impl fmt::Debug for LagrangianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LagrangianSystem")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("domain", &self.domain)
            .field("horizon", &self.horizon)
            .finish()
    }
}

/// `H(q, p)` stored as a field over `(q, p) ∈ R^{2n}`.
#[derive(Clone)]
pub struct HamiltonianSystem {
    name: String,
    space: ConfigSpace,
    field: Arc<dyn ScalarField>,
}

impl HamiltonianSystem {
    pub fn new(name: impl Into<String>, space: ConfigSpace, field: Arc<dyn ScalarField>) -> Result<Self> {
        check_dim(2 * space.dimension(), field.dim())?;
        Ok(Self {
            name: name.into(),
            space,
            field,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn field(&self) -> &Arc<dyn ScalarField> {
        &self.field
    }

    pub fn eval(&self, q: &[f64], p: &[f64]) -> f64 {
        self.field.eval(&LagrangianSystem::pack(q, p))
    }

    /// `(∂H/∂q, ∂H/∂p)` at the phase point `x = (q, p)`.
    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        self.field.gradient(x)
    }
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("name", &self.name)
            .field("space", &self.space)
            .finish()
    }
}

/// Two-point function `Λ(q0, q1)` over `(q0, q1) ∈ R^{2n}`.
#[derive(Clone)]
pub struct DiscreteLagrangian {
    name: String,
    space: ConfigSpace,
    field: Arc<dyn ScalarField>,
}

impl DiscreteLagrangian {
    pub fn new(name: impl Into<String>, space: ConfigSpace, field: Arc<dyn ScalarField>) -> Result<Self> {
        check_dim(2 * space.dimension(), field.dim())?;
        Ok(Self {
            name: name.into(),
            space,
            field,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn eval(&self, q0: &[f64], q1: &[f64]) -> f64 {
        self.field.eval(&LagrangianSystem::pack(q0, q1))
    }

    /// `(∂Λ/∂q0, ∂Λ/∂q1)` as two n-vectors.
    pub fn partials(&self, q0: &[f64], q1: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let n = self.dimension();
        let g = self.field.gradient(&LagrangianSystem::pack(q0, q1));
        (g.rows(0, n).into_owned(), g.rows(n, n).into_owned())
    }

    /// Hessian blocks `(∂²/∂q0², ∂²/∂q0∂q1, ∂²/∂q1²)`; the mixed block has
    /// rows indexed by `q0` and columns by `q1`.
    pub fn hessian_blocks(&self, q0: &[f64], q1: &[f64]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.dimension();
        let h = self.field.hessian(&LagrangianSystem::pack(q0, q1));
        (
            h.view((0, 0), (n, n)).into_owned(),
            h.view((0, n), (n, n)).into_owned(),
            h.view((n, n), (n, n)).into_owned(),
        )
    }
}

impl fmt::Debug for DiscreteLagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteLagrangian")
            .field("name", &self.name)
            .field("space", &self.space)
            .finish()
    }
}

/// Anything the catalog can produce.
#[derive(Debug, Clone)]
pub enum System {
    Continuous(LagrangianSystem),
    Discrete(DiscreteLagrangian),
}

impl System {
    pub fn name(&self) -> &str {
        match self {
            System::Continuous(l) => l.name(),
            System::Discrete(l) => l.name(),
        }
    }

    pub fn into_continuous(self) -> Result<LagrangianSystem> {
        match self {
            System::Continuous(l) => Ok(l),
            System::Discrete(l) => Err(Error::InvalidArgument(format!(
                "`{}` is a discrete Lagrangian, a continuous one is required",
                l.name()
            ))),
        }
    }

    pub fn into_discrete(self) -> Result<DiscreteLagrangian> {
        match self {
            System::Discrete(l) => Ok(l),
            System::Continuous(l) => Err(Error::InvalidArgument(format!(
                "`{}` is a continuous Lagrangian, a discrete one is required",
                l.name()
            ))),
        }
    }
}
