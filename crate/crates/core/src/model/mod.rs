//! The dimensionless dynamical system in the frame rotating with the primaries.
//!
//! Units: the primaries' masses sum to one, their separation is one and one
//! revolution takes `2 pi` time units. The radiating primary of mass `1 - mu`
//! sits at `(-mu, 0)`, the oblate secondary of mass `mu` at `(1 - mu, 0)`.
//!
//! The particle obeys
//!
//! ```text
//! x'' - 2 n y' = dU1/dx + Fx
//! y'' + 2 n x' = dU1/dy + Fy
//! ```
//!
//! with the amended potential
//! `U1 = n^2 (x^2 + y^2) / 2 + (1 - mu) q1 / r1 + mu / r2 + mu A2 / (2 r2^3)`
//! and the Poynting-Robertson drag `(Fx, Fy)`, which depends on the
//! rotating-frame velocity. Without drag `C = 2 U1 - x'^2 - y'^2` is conserved;
//! with drag it changes at the rate `dC/dt = -2 (x' Fx + y' Fy)`.

mod params;

pub use params::{
    drag_coefficient, mass_reduction_from_grain, mean_motion, oblateness_from_radii,
    GrainProperties, SystemParams, DEFAULT_COLLISION_GUARD, GRAIN_PRESSURE_CONSTANT,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// Planar state in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, vx: f64, vy: f64, t: f64) -> Self {
        Self { x, y, vx, vy, t }
    }

    /// State at rest at `(x, y)` and time zero.
    pub fn at_rest(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0, 0.0, 0.0)
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.vx, self.vy]
    }

    pub(crate) fn from_array(v: [f64; 4], t: f64) -> Self {
        Self::new(v[0], v[1], v[2], v[3], t)
    }
}

/// Acceleration components in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AccelVector {
    pub ax: f64,
    pub ay: f64,
}

impl AccelVector {
    pub fn new(ax: f64, ay: f64) -> Self {
        Self { ax, ay }
    }

    pub fn norm(&self) -> f64 {
        self.ax.hypot(self.ay)
    }
}

/// Time derivative of a [`PhaseState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateDerivative {
    pub dx: f64,
    pub dy: f64,
    pub dvx: f64,
    pub dvy: f64,
}

impl StateDerivative {
    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.dx, self.dy, self.dvx, self.dvy]
    }
}

/// Distances `(r1, r2)` from the radiating primary and the oblate secondary,
/// refusing positions closer than the collision guard.
pub fn distances(p: &SystemParams, x: f64, y: f64) -> Result<(f64, f64)> {
    let mu = p.mu();
    let r1 = (x + mu).hypot(y);
    let r2 = (x + mu - 1.0).hypot(y);
    let guard = p.collision_guard();
    // also catches NaN coordinates
    if !(r1 >= guard && r2 >= guard) {
        return Err(Error::Singularity { r1, r2, guard });
    }
    Ok((r1, r2))
}

/// Amended potential `U1(x, y)`.
pub fn amended_potential(p: &SystemParams, x: f64, y: f64) -> Result<f64> {
    let (r1, r2) = distances(p, x, y)?;
    let mu = p.mu();
    let n2 = p.n() * p.n();
    Ok(0.5 * n2 * (x * x + y * y)
        + (1.0 - mu) * p.q1() / r1
        + mu / r2
        + mu * p.a2() / (2.0 * r2.powi(3)))
}

/// Closed-form gradient `(dU1/dx, dU1/dy)`.
pub fn conservative_gradient(p: &SystemParams, x: f64, y: f64) -> Result<AccelVector> {
    let (r1, r2) = distances(p, x, y)?;
    let mu = p.mu();
    let n2 = p.n() * p.n();
    let k1 = (1.0 - mu) * p.q1() / r1.powi(3);
    // point-mass plus oblateness pull of the secondary
    let k2 = mu / r2.powi(3) + 1.5 * mu * p.a2() / r2.powi(5);
    Ok(AccelVector {
        ax: n2 * x - k1 * (x + mu) - k2 * (x + mu - 1.0),
        ay: n2 * y - k1 * y - k2 * y,
    })
}

/// Poynting-Robertson drag components `(Fx, Fy)`.
pub fn drag_acceleration(p: &SystemParams, s: &PhaseState) -> Result<AccelVector> {
    let (r1, _) = distances(p, s.x, s.y)?;
    let w1 = p.w1();
    if w1 == 0.0 {
        return Ok(AccelVector::default());
    }
    let mu = p.mu();
    let n = p.n();
    let r1sq = r1 * r1;
    let xs = s.x + mu;
    // radial velocity times r1
    let radial = xs * s.vx + s.y * s.vy;
    let scale = w1 / r1sq;
    Ok(AccelVector {
        ax: -scale * (xs / r1sq * radial + s.vx - n * s.y),
        ay: -scale * (s.y / r1sq * radial + s.vy + n * xs),
    })
}

/// Right-hand side of the equations of motion.
pub fn equations_of_motion(p: &SystemParams, s: &PhaseState) -> Result<StateDerivative> {
    let grad = conservative_gradient(p, s.x, s.y)?;
    let drag = drag_acceleration(p, s)?;
    let n = p.n();
    Ok(StateDerivative {
        dx: s.vx,
        dy: s.vy,
        dvx: 2.0 * n * s.vy + grad.ax + drag.ax,
        dvy: -2.0 * n * s.vx + grad.ay + drag.ay,
    })
}

/// Jacobi quantity `C = 2 U1 - vx^2 - vy^2`.
pub fn jacobi_constant(p: &SystemParams, s: &PhaseState) -> Result<f64> {
    Ok(2.0 * amended_potential(p, s.x, s.y)? - s.vx * s.vx - s.vy * s.vy)
}

/// Rate of change of the Jacobi quantity under drag, `-2 (vx Fx + vy Fy)`.
pub fn jacobi_drift_rate(p: &SystemParams, s: &PhaseState) -> Result<f64> {
    let f = drag_acceleration(p, s)?;
    Ok(-2.0 * (s.vx * f.ax + s.vy * f.ay))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn potential_equal_masses_on_axis() {
        let p = SystemParams::classical(0.5).unwrap();
        let u = amended_potential(&p, 0.0, 1.0).unwrap();
        assert_relative_eq!(u, 0.5 + 1.0 / 1.25f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(u, 1.3944272, epsilon = 1e-7);
    }

    #[test]
    fn collision_guard_trips() {
        let p = SystemParams::with_w1(0.1, 0.9, 0.01, 0.001).unwrap();
        let at_secondary = 1.0 - p.mu();
        assert!(matches!(
            amended_potential(&p, at_secondary + 1e-8, 0.0),
            Err(Error::Singularity { .. })
        ));
        assert!(matches!(
            conservative_gradient(&p, -p.mu(), 1e-7),
            Err(Error::Singularity { .. })
        ));
        let s = PhaseState::new(at_secondary, 0.0, 0.1, 0.0, 0.0);
        assert!(equations_of_motion(&p, &s).is_err());
        assert!(jacobi_constant(&p, &s).is_err());
        assert!(jacobi_drift_rate(&p, &s).is_err());
        assert!(amended_potential(&p, f64::NAN, 0.3).is_err());
        // just outside the guard is fine
        assert!(amended_potential(&p, at_secondary + 2e-6, 0.0).is_ok());
    }

    #[test]
    fn classical_l4_is_stationary() {
        let p = SystemParams::classical(0.1).unwrap();
        let y = 3f64.sqrt() / 2.0;
        let g = conservative_gradient(&p, 0.4, y).unwrap();
        assert!(g.ax.abs() < 1e-15 && g.ay.abs() < 1e-15, "{g:?}");
        let d = equations_of_motion(&p, &PhaseState::at_rest(0.4, y)).unwrap();
        for v in d.to_array() {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn equal_mass_symmetry() {
        let p = SystemParams::classical(0.5).unwrap();
        for y in [0.3, 0.8, 1.7, -0.9] {
            assert_eq!(conservative_gradient(&p, 0.0, y).unwrap().ax, 0.0);
            let d = equations_of_motion(&p, &PhaseState::at_rest(0.0, y)).unwrap();
            assert_eq!(d.dvx, 0.0);
        }
    }

    #[test]
    fn drag_vanishes_without_w1() {
        let p = SystemParams::with_w1(0.1, 0.9, 0.01, 0.0).unwrap();
        let s = PhaseState::new(0.3, 0.7, 0.2, -0.1, 0.0);
        assert_eq!(drag_acceleration(&p, &s).unwrap(), AccelVector::default());
        assert_eq!(jacobi_drift_rate(&p, &s).unwrap(), 0.0);
    }

    #[test]
    fn drag_at_rest() {
        let p = SystemParams::with_w1(0.2, 0.8, 0.01, 0.003).unwrap();
        let (x, y) = (0.35, 0.6);
        let r1sq = (x + 0.2f64).powi(2) + y * y;
        let f = drag_acceleration(&p, &PhaseState::at_rest(x, y)).unwrap();
        assert_relative_eq!(f.ax, p.w1() * p.n() * y / r1sq, max_relative = 1e-14);
        assert_relative_eq!(
            f.ay,
            -p.w1() * p.n() * (x + 0.2) / r1sq,
            max_relative = 1e-14
        );
        assert_eq!(
            jacobi_drift_rate(&p, &PhaseState::at_rest(x, y)).unwrap(),
            0.0
        );
    }

    #[test]
    fn drag_power_term_by_term() {
        let p = SystemParams::with_w1(0.05, 0.7, 0.002, 0.02).unwrap();
        let s = PhaseState::new(0.2, -0.5, 0.3, 0.15, 0.0);
        let (mu, n, w1) = (p.mu(), p.n(), p.w1());
        let r1sq = (s.x + mu).powi(2) + s.y.powi(2);
        let dot = (s.x + mu) * s.vx + s.y * s.vy;
        // x' Fx + y' Fy = -(W1/r1^2) [ dot^2 / r1^2 + v^2 + n (x+mu) y' - n y x' ]
        let power = -(w1 / r1sq)
            * (dot * dot / r1sq + s.vx * s.vx + s.vy * s.vy + n * (s.x + mu) * s.vy
                - n * s.y * s.vx);
        assert_relative_eq!(
            jacobi_drift_rate(&p, &s).unwrap(),
            -2.0 * power,
            max_relative = 1e-13
        );
    }

    #[test]
    fn jacobi_velocity_offset() {
        let p = SystemParams::with_w1(0.2, 0.8, 0.01, 0.0).unwrap();
        let rest = PhaseState::at_rest(0.4, 0.75);
        let c0 = jacobi_constant(&p, &rest).unwrap();
        assert_eq!(c0, 2.0 * amended_potential(&p, 0.4, 0.75).unwrap());
        let moving = PhaseState::new(0.4, 0.75, 0.3, -0.4, 0.0);
        assert_relative_eq!(
            jacobi_constant(&p, &moving).unwrap(),
            c0 - 0.25,
            max_relative = 1e-15
        );
    }

    #[test]
    fn jacobi_at_classical_l4_duplicate_evaluation() {
        let p = SystemParams::classical(0.1).unwrap();
        let (x, y) = (0.4, 3f64.sqrt() / 2.0);
        // r1 = r2 = 1 at the classical triangular point
        let expected = (x * x + y * y) + 2.0 * 0.9 + 2.0 * 0.1;
        assert_relative_eq!(
            jacobi_constant(&p, &PhaseState::at_rest(x, y)).unwrap(),
            expected,
            max_relative = 1e-15
        );
    }
}
