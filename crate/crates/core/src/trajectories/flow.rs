use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::systems::HamiltonianSystem;

/// Sampled phase-space trajectory; `states[i]` is `(q, p)` at `times[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePath {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl PhasePath {
    pub fn last(&self) -> &DVector<f64> {
        self.states.last().unwrap()
    }
}

fn vector_field(h: &HamiltonianSystem, x: &DVector<f64>) -> DVector<f64> {
    let n = h.dimension();
    let g = h.gradient(x.as_slice());
    DVector::from_fn(2 * n, |i, _| if i < n { g[n + i] } else { -g[i - n] })
}

/// Time-`t` Hamiltonian flow by the classical fourth-order Runge–Kutta
/// method with `steps` uniform steps.
pub fn integrate_flow(
    h: &HamiltonianSystem,
    x0: &[f64],
    t: f64,
    steps: usize,
) -> Result<PhasePath> {
    check_dim(2 * h.dimension(), x0.len())?;
    if steps == 0 || !t.is_finite() {
        return Err(Error::InvalidArgument("need at least one step over a finite time".into()));
    }
    let dt = t / steps as f64;
    let mut x = DVector::from_column_slice(x0);
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    for k in 0..steps {
        let k1 = vector_field(h, &x);
        let k2 = vector_field(h, &(&x + &k1 * (dt / 2.0)));
        let k3 = vector_field(h, &(&x + &k2 * (dt / 2.0)));
        let k4 = vector_field(h, &(&x + &k3 * dt));
        let next = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::FlowBlowUp {
                last_time: k as f64 * dt,
            });
        }
        x = next;
        times.push(if k + 1 == steps { t } else { (k + 1) as f64 * dt });
        states.push(x.clone());
    }
    Ok(PhasePath { times, states })
}
