//! Midpoint-rule discrete action over a time grid made of pieces, each with
//! its own Lagrangian and uniform step.
//!
//! Segment `k` joins nodes `k` and `k+1` and contributes
//! `φ_k(a, b) = h_k · L((a+b)/2, (b−a)/h_k)`. The Hessian of the total action
//! in the interior nodes is block tridiagonal and is factored block by block.

use nalgebra::{DMatrix, DVector, LU};

use super::DiscretePath;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{SolveDiagnostics, SINGULAR_CONDITION};
use crate::systems::LagrangianSystem;

/// Gradient, diagonal blocks and off-diagonal blocks of the stationarity system.
type Blocks = (Vec<DVector<f64>>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>);

#[derive(Clone, Copy)]
pub(crate) struct Piece<'a> {
    pub lagrangian: &'a LagrangianSystem,
    pub duration: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

/// One-sided momenta at a node where the active Lagrangian switches.
#[derive(Debug, Clone)]
pub(crate) struct Junction {
    pub before: DVector<f64>,
    pub after: DVector<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct GluedSolution {
    pub path: DiscretePath,
    pub value: f64,
    /// `Σ|φ_k|`, the scale for round-off in `value`.
    pub magnitude: f64,
    pub p_start: DVector<f64>,
    pub p_end: DVector<f64>,
    pub junctions: Vec<Junction>,
    pub diag: SolveDiagnostics,
}

struct Segment<'a> {
    l: &'a LagrangianSystem,
    h: f64,
}

pub(crate) struct GluedAction<'a> {
    n: usize,
    segments: Vec<Segment<'a>>,
    times: Vec<f64>,
    switch_nodes: Vec<usize>,
}

struct SegmentDerivatives {
    grad_a: DVector<f64>,
    grad_b: DVector<f64>,
    hess: Option<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)>,
}

impl<'a> GluedAction<'a> {
    pub fn new(pieces: &[Piece<'a>]) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::InvalidArgument("no pieces".into()))?;
        let n = first.lagrangian.dimension();
        let mut segments = Vec::new();
        let mut times = vec![0.0];
        let mut switch_nodes = Vec::new();
        for (i, piece) in pieces.iter().enumerate() {
            check_dim(n, piece.lagrangian.dimension())?;
            if piece.duration <= 0.0 || !piece.duration.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "duration must be positive, got {}",
                    piece.duration
                )));
            }
            if piece.steps == 0 {
                return Err(Error::InvalidArgument("each piece needs at least one step".into()));
            }
            if i > 0 {
                switch_nodes.push(segments.len());
            }
            let h = piece.duration / piece.steps as f64;
            let start = *times.last().unwrap();
            for s in 0..piece.steps {
                segments.push(Segment { l: piece.lagrangian, h });
                times.push(if s + 1 == piece.steps {
                    start + piece.duration
                } else {
                    start + (s + 1) as f64 * h
                });
            }
        }
        if segments.len() < 2 {
            return Err(Error::InvalidArgument("at least two steps are required".into()));
        }
        Ok(Self {
            n,
            segments,
            times,
            switch_nodes,
        })
    }

    /// Rebuild from an existing single-Lagrangian path's time grid.
    pub fn from_path(l: &'a LagrangianSystem, path: &DiscretePath) -> Result<Self> {
        if path.points.len() < 3 {
            return Err(Error::InvalidArgument("path needs at least three points".into()));
        }
        let segments = path
            .times
            .windows(2)
            .map(|w| Segment { l, h: w[1] - w[0] })
            .collect();
        Ok(Self {
            n: l.dimension(),
            segments,
            times: path.times.clone(),
            switch_nodes: path.switch_nodes.clone(),
        })
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    fn segment_value(&self, k: usize, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let Segment { l, h } = self.segments[k];
        let mid = (a + b) * 0.5;
        let vel = (b - a) / h;
        h * l.eval(mid.as_slice(), vel.as_slice())
    }

    fn segment_derivatives(
        &self,
        k: usize,
        a: &DVector<f64>,
        b: &DVector<f64>,
        with_hessian: bool,
    ) -> SegmentDerivatives {
        let n = self.n;
        let Segment { l, h } = self.segments[k];
        let mid = (a + b) * 0.5;
        let vel = (b - a) / h;
        let g = l.gradient(mid.as_slice(), vel.as_slice());
        let gq = g.rows(0, n);
        let gv = g.rows(n, n);
        let grad_a = gq * (0.5 * h) - gv;
        let grad_b = gq * (0.5 * h) + gv;
        let hess = with_hessian.then(|| {
            // (a, b) ↦ (mid, vel) is linear with matrix J; Hφ = h·Jᵀ·H_L·J.
            let mut jac = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                jac[(i, i)] = 0.5;
                jac[(i, n + i)] = 0.5;
                jac[(n + i, i)] = -1.0 / h;
                jac[(n + i, n + i)] = 1.0 / h;
            }
            let hl = l.hessian(mid.as_slice(), vel.as_slice());
            let hp = jac.transpose() * hl * &jac * h;
            (
                hp.view((0, 0), (n, n)).into_owned(),
                hp.view((0, n), (n, n)).into_owned(),
                hp.view((n, n), (n, n)).into_owned(),
            )
        });
        SegmentDerivatives { grad_a, grad_b, hess }
    }

    pub fn value(&self, points: &[DVector<f64>]) -> (f64, f64) {
        (0..self.steps()).fold((0.0, 0.0), |(v, m), k| {
            let s = self.segment_value(k, &points[k], &points[k + 1]);
            (v + s, m + s.abs())
        })
    }

    /// Discrete Euler–Lagrange expression at every interior node.
    pub fn interior_gradient(&self, points: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let derivs: Vec<_> = (0..self.steps())
            .map(|k| self.segment_derivatives(k, &points[k], &points[k + 1], false))
            .collect();
        (1..self.steps())
            .map(|k| &derivs[k - 1].grad_b + &derivs[k].grad_a)
            .collect()
    }

    pub fn boundary_momenta(&self, points: &[DVector<f64>]) -> (DVector<f64>, DVector<f64>) {
        let last = self.steps() - 1;
        let first = self.segment_derivatives(0, &points[0], &points[1], false);
        let end = self.segment_derivatives(last, &points[last], &points[last + 1], false);
        (-first.grad_a, end.grad_b)
    }

    pub fn junctions(&self, points: &[DVector<f64>]) -> Vec<Junction> {
        self.switch_nodes
            .iter()
            .map(|&k| {
                let left = self.segment_derivatives(k - 1, &points[k - 1], &points[k], false);
                let right = self.segment_derivatives(k, &points[k], &points[k + 1], false);
                Junction {
                    before: left.grad_b,
                    after: -right.grad_a,
                }
            })
            .collect()
    }

    fn assemble(&self, points: &[DVector<f64>]) -> Blocks {
        let derivs: Vec<_> = (0..self.steps())
            .map(|k| self.segment_derivatives(k, &points[k], &points[k + 1], true))
            .collect();
        let mut grad = Vec::with_capacity(self.steps() - 1);
        let mut diag = Vec::with_capacity(self.steps() - 1);
        let mut off = Vec::with_capacity(self.steps() - 2);
        for k in 1..self.steps() {
            let (_, _, bb) = derivs[k - 1].hess.as_ref().unwrap();
            let (aa, ab, _) = derivs[k].hess.as_ref().unwrap();
            grad.push(&derivs[k - 1].grad_b + &derivs[k].grad_a);
            diag.push(bb + aa);
            if k + 1 < self.steps() {
                off.push(ab.clone());
            }
        }
        (grad, diag, off)
    }

    pub fn linear_guess(&self, qa: &[f64], qb: &[f64]) -> Vec<DVector<f64>> {
        let a = DVector::from_column_slice(qa);
        let b = DVector::from_column_slice(qb);
        let total = *self.times.last().unwrap();
        self.times
            .iter()
            .map(|&t| &a + (&b - &a) * (t / total))
            .collect()
    }

    pub fn path(&self, points: Vec<DVector<f64>>) -> DiscretePath {
        DiscretePath {
            times: self.times.clone(),
            points,
            switch_nodes: self.switch_nodes.clone(),
        }
    }

    /// Newton iteration on the interior nodes with fixed endpoints.
    pub fn solve(&self, qa: &[f64], qb: &[f64], opts: SolverOptions) -> Result<GluedSolution> {
        check_dim(self.n, qa.len())?;
        check_dim(self.n, qb.len())?;
        let mut points = self.linear_guess(qa, qb);
        let mut iterations = 0;
        let (mut grad, mut diag, mut off) = self.assemble(&points);
        let mut norm = check_finite(&grad)?;
        loop {
            if norm <= opts.tol {
                break;
            }
            if iterations == opts.max_iter {
                return Err(not_converged(&points, norm, iterations));
            }
            let (step, _) = block_tridiagonal_solve(&diag, &off, &grad)?;
            let merit = euclid(&grad);
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<DVector<f64>> = points
                    .iter()
                    .enumerate()
                    .map(|(k, q)| {
                        if k == 0 || k == self.steps() {
                            q.clone()
                        } else {
                            q - &step[k - 1] * alpha
                        }
                    })
                    .collect();
                let tg = self.interior_gradient(&trial);
                if tg.iter().all(|g| g.iter().all(|v| v.is_finite()))
                    && euclid(&tg) <= (1.0 - 1e-4 * alpha) * merit
                {
                    accepted = Some(trial);
                    break;
                }
                alpha *= 0.5;
            }
            iterations += 1;
            match accepted {
                Some(trial) => points = trial,
                None => return Err(not_converged(&points, norm, iterations)),
            }
            (grad, diag, off) = self.assemble(&points);
            norm = check_finite(&grad)?;
        }

        let positive_definite = block_tridiagonal_solve(&diag, &off, &grad)
            .map(|(_, pd)| pd)
            .unwrap_or(false);
        let (value, magnitude) = self.value(&points);
        let (p_start, p_end) = self.boundary_momenta(&points);
        let junctions = self.junctions(&points);
        Ok(GluedSolution {
            value,
            magnitude,
            p_start,
            p_end,
            junctions,
            diag: SolveDiagnostics {
                iterations,
                final_residual_norm: norm,
                converged: true,
                hessian_positive_definite: Some(positive_definite),
            },
            path: self.path(points),
        })
    }
}

fn euclid(blocks: &[DVector<f64>]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

fn check_finite(blocks: &[DVector<f64>]) -> Result<f64> {
    let mut norm = 0.0_f64;
    for (k, b) in blocks.iter().enumerate() {
        for (i, v) in b.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    component: k * b.len() + i,
                });
            }
            norm = norm.max(v.abs());
        }
    }
    Ok(norm)
}

fn not_converged(points: &[DVector<f64>], residual: f64, iterations: usize) -> Error {
    Error::NotConverged {
        best: points.iter().flat_map(|p| p.iter().copied()).collect(),
        residual,
        iterations,
    }
}

/// Solve the symmetric block-tridiagonal system `A x = r` where `diag[k]`
/// are the diagonal blocks and `off[k]` couples unknowns `k` and `k+1`.
///
/// Returns the solution and whether every Schur-complement pivot is
/// positive definite, which holds iff `A` is.
pub(crate) fn block_tridiagonal_solve(
    diag: &[DMatrix<f64>],
    off: &[DMatrix<f64>],
    rhs: &[DVector<f64>],
) -> Result<(Vec<DVector<f64>>, bool)> {
    let m = diag.len();
    let mut pivots: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = Vec::with_capacity(m);
    let mut y: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut positive_definite = true;
    for k in 0..m {
        let (schur, yk) = if k == 0 {
            (diag[0].clone(), rhs[0].clone())
        } else {
            let prev = &pivots[k - 1];
            let u = &off[k - 1];
            let s_inv_u = prev.solve(u).ok_or(Error::SingularJacobian {
                condition: f64::INFINITY,
            })?;
            let s_inv_y = prev.solve(&y[k - 1]).ok_or(Error::SingularJacobian {
                condition: f64::INFINITY,
            })?;
            (&diag[k] - u.transpose() * s_inv_u, &rhs[k] - u.transpose() * s_inv_y)
        };
        if schur.clone().cholesky().is_none() {
            positive_definite = false;
            let sv = schur.clone().singular_values();
            let condition = if sv.min() == 0.0 { f64::INFINITY } else { sv.max() / sv.min() };
            if condition.is_nan() || condition > SINGULAR_CONDITION {
                return Err(Error::SingularJacobian { condition });
            }
        }
        pivots.push(schur.lu());
        y.push(yk);
    }
    let mut x = vec![DVector::zeros(0); m];
    for k in (0..m).rev() {
        let r = if k + 1 < m { &y[k] - &off[k] * &x[k + 1] } else { y[k].clone() };
        x[k] = pivots[k].solve(&r).ok_or(Error::SingularJacobian {
            condition: f64::INFINITY,
        })?;
    }
    Ok((x, positive_definite))
}
