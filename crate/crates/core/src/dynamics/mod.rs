//! Potentials, effective Hamiltonians, equations of motion and their
//! integration.

mod closed_form;
mod flow;
pub mod integrator;
mod potential;
mod scales;
mod trajectory;

pub use closed_form::{closed_form_free, closed_form_linear, spreading_frequency};
pub use flow::{
    effective_hamiltonian, effective_hamiltonian_canonical, effective_potential, eom_rhs_canonical,
    eom_rhs_moments, width_balance_scale, width_equilibrium, CanonicalFlow, CanonicalRates, Flow,
    MomentFlow, MomentRates, S_FLOOR_REL,
};
pub use integrator::{IntegratorConfig, Method, Status};
pub use potential::{PotentialDerivatives, PotentialKind, PotentialModel, Units};
pub use scales::{u_parameter, ScaleSet};
pub use trajectory::{integrate, integrate_monitored, DenseStore, Trajectory, TrajectorySample};
