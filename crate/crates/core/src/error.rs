use thiserror::Error;

/// Errors raised by the dynamical model, the equilibrium solvers and the integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The particle is closer to a primary than the collision guard.
    #[error("singularity: r1 = {r1:e}, r2 = {r2:e} (guard {guard:e})")]
    Singularity { r1: f64, r2: f64, guard: f64 },

    /// A closed-form expression cannot be evaluated for these parameters.
    #[error("degenerate formula: {0}")]
    DegenerateFormula(String),

    /// Newton refinement stopped without meeting the tolerance.
    #[error("no convergence after {iterations} iterations: last iterate ({x}, {y}), residual {residual:e}")]
    Convergence {
        x: f64,
        y: f64,
        residual: f64,
        iterations: usize,
    },

    /// The finite-difference Jacobian could not be inverted.
    #[error("singular Jacobian at ({x}, {y}), determinant {determinant:e}")]
    SingularJacobian { x: f64, y: f64, determinant: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
