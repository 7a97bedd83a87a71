//! Planar photogravitational restricted three-body problem with
//! Poynting-Robertson drag from the radiating primary and an oblate secondary.
//!
//! * [`model`]: parameters, amended potential, drag, equations of motion and
//!   the Jacobi quantity.
//! * [`equilibria`]: triangular points L4/L5, analytic to first order in drag
//!   and oblateness, and refined by Newton iteration.
//! * [`dynamics`]: adaptive integration with Jacobi monitoring, and
//!   zero-velocity curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod equilibria;
mod error;
pub mod model;

pub use dynamics::{
    integrate, jacobi_audit, zero_velocity_curve, IntegratorConfig, JacobiAudit, Sample,
    Termination, Trajectory, Window, ZeroVelocityCurve,
};
pub use equilibria::{
    analytic_epsilons, analytic_triangular_point, equilibrium_residual, limiting_case_point,
    locate_triangular_point, photogravitational_base, refine_equilibrium, Branch, EquilibriumPoint,
    LimitingCase, Method, PerturbationTerms,
};
pub use error::{Error, Result};
pub use model::{
    amended_potential, conservative_gradient, drag_acceleration, drag_coefficient,
    equations_of_motion, jacobi_constant, jacobi_drift_rate, mass_reduction_from_grain,
    mean_motion, oblateness_from_radii, AccelVector, GrainProperties, PhaseState, StateDerivative,
    SystemParams,
};
