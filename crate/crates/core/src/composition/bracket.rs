use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::systems::HamiltonianSystem;
use crate::trajectories::integrate_flow;

/// Canonical bracket `Σ_j (∂H1/∂p_j ∂H2/∂q_j − ∂H1/∂q_j ∂H2/∂p_j)` at the
/// phase point `x = (q, p)`.
pub fn poisson_bracket(h1: &HamiltonianSystem, h2: &HamiltonianSystem, x: &[f64]) -> Result<f64> {
    let n = h1.dimension();
    check_dim(n, h2.dimension())?;
    check_dim(2 * n, x.len())?;
    let g1 = h1.gradient(x);
    let g2 = h2.gradient(x);
    if let Some(component) = g1.iter().chain(g2.iter()).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            component: component % (2 * n),
        });
    }
    Ok((0..n).map(|j| g1[n + j] * g2[j] - g1[j] * g2[n + j]).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowCommutator {
    /// `‖endpoint_12 − endpoint_21‖∞`
    pub norm: f64,
    /// `F2^{t2}(F1^{t1}(x0))`
    pub endpoint_12: DVector<f64>,
    /// `F1^{t1}(F2^{t2}(x0))`
    pub endpoint_21: DVector<f64>,
}

/// Compare the two orders of composing the flows, each integrated with
/// `steps` RK4 steps.
pub fn flow_commutator(
    h1: &HamiltonianSystem,
    h2: &HamiltonianSystem,
    x0: &[f64],
    t1: f64,
    t2: f64,
    steps: usize,
) -> Result<FlowCommutator> {
    check_dim(h1.dimension(), h2.dimension())?;
    let then = |first: &HamiltonianSystem, ta: f64, second: &HamiltonianSystem, tb: f64| {
        let mid = integrate_flow(first, x0, ta, steps)?;
        let end = integrate_flow(second, mid.last().as_slice(), tb, steps)?;
        Ok::<_, Error>(end.last().clone())
    };
    let endpoint_12 = then(h1, t1, h2, t2)?;
    let endpoint_21 = then(h2, t2, h1, t1)?;
    Ok(FlowCommutator {
        norm: (&endpoint_12 - &endpoint_21).amax(),
        endpoint_12,
        endpoint_21,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::FnField;
    use crate::systems::ConfigSpace;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn hamiltonian(name: &str, f: fn(&[f64]) -> f64) -> HamiltonianSystem {
        HamiltonianSystem::new(name, ConfigSpace::euclidean(1).unwrap(), Arc::new(FnField::new(2, f)))
            .unwrap()
    }

    fn free() -> HamiltonianSystem {
        hamiltonian("free", |x| x[1] * x[1] / 2.0)
    }

    fn slow() -> HamiltonianSystem {
        hamiltonian("slow", |x| x[1] * x[1] / 4.0)
    }

    fn oscillator() -> HamiltonianSystem {
        hamiltonian("oscillator", |x| (x[0] * x[0] + x[1] * x[1]) / 2.0)
    }

    #[test]
    fn bracket_values() {
        assert_abs_diff_eq!(poisson_bracket(&free(), &oscillator(), &[1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(poisson_bracket(&free(), &slow(), &[0.3, -2.0]).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(poisson_bracket(&oscillator(), &oscillator(), &[0.4, 0.7]).unwrap(), 0.0);
        let x = [0.2, -0.9];
        let ab = poisson_bracket(&free(), &oscillator(), &x).unwrap();
        let ba = poisson_bracket(&oscillator(), &free(), &x).unwrap();
        assert_abs_diff_eq!(ab, -ba, epsilon = 1e-10);
    }

    #[test]
    fn flows_of_momentum_functions_commute() {
        let c = flow_commutator(&free(), &slow(), &[0.0, 1.0], 1.0, 1.0, 50).unwrap();
        assert!(c.norm < 1e-12);
        assert_abs_diff_eq!(c.endpoint_12[0], 1.5, epsilon = 1e-9);
    }

    #[test]
    fn free_and_rotation_do_not_commute() {
        let c = flow_commutator(&free(), &oscillator(), &[0.0, 1.0], 0.5, 0.5, 200).unwrap();
        assert_abs_diff_eq!(c.norm, 0.239712769302102, epsilon = 1e-8);
    }

    #[test]
    fn zero_time_is_trivially_commuting() {
        let c = flow_commutator(&free(), &oscillator(), &[0.3, 1.0], 0.0, 0.7, 20).unwrap();
        assert_eq!(c.norm, 0.0);
    }
}
