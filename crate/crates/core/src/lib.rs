//! Numerical checks of the commuting-actions criterion: composed principal
//! action functions of two Lagrangians, the Poisson bracket and flows of
//! their Hamiltonians, and the discrete-time analogue with Lagrangian
//! symplectic maps.

pub mod composition;
pub mod discrete;
pub mod error;
pub mod legendre;
pub mod numerics;
pub mod report;
pub mod systems;
pub mod trajectories;

pub use composition::{
    action_commutator, commutativity_report, composed_action, composed_action_derivatives,
    composed_action_with_junction, endpoint_momentum_mismatch, energy_transport_check,
    flow_commutator, junction_momentum_jump, poisson_bracket, ComposedActionResult,
    ComposedDerivativeResiduals, CompositionPair, ContinuousReport, FlowCommutator, Order,
    ReportOptions,
};
pub use discrete::{
    corner_consistency_check, discrete_action_commutator, discrete_commutativity_report,
    discrete_composed_action, discrete_map, map_commutator, solve_corner, symplecticity_check,
    CornerPoint, CornerSolution, DiscreteMapResult, DiscreteOptions, DiscreteReport,
    MapCommutator,
};
pub use error::{Error, Result};
pub use legendre::{
    check_nondegeneracy, hamiltonian_of, momentum_of_velocity, velocity_of_momentum,
    LegendrePair, Nondegeneracy,
};
pub use numerics::SolveDiagnostics;
pub use report::{CommutativityReport, GridSpec, Summary, TimePair, Verdict, VerdictRule};
pub use systems::{
    catalog, catalog_lookup, parse_system_spec, ConfigSpace, DiscreteLagrangian,
    HamiltonianSystem, LagrangianSystem, System, SystemSpec,
};
pub use trajectories::{
    euler_lagrange_residual, hj_check, integrate_flow, minimize_action, principal_action,
    richardson_action, ActionOptions, ActionResult, DiscretePath, HjResiduals, PhasePath,
};
