//! Trajectories of the drag-perturbed system and zero-velocity curves.

mod rk;
mod zvc;

pub use zvc::{zero_velocity_curve, Window, ZeroVelocityCurve, MIN_RESOLUTION};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{
    distances, equations_of_motion, jacobi_constant, jacobi_drift_rate, PhaseState, SystemParams,
};
use rk::{hermite, StepOutcome, Stepper, Vec4};

/// Default escape radius, measured from the radiating primary.
pub const DEFAULT_ESCAPE_RADIUS: f64 = 50.0;

/// Rates below this magnitude are skipped by the drift audit.
pub const DRIFT_RATE_FLOOR: f64 = 1e-15;

const MAX_STEPS: usize = 50_000_000;

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Spacing of the uniformly sampled output.
    pub sample_dt: f64,
    /// Distance from the radiating primary beyond which the particle has escaped.
    pub escape_radius: f64,
    /// Upper bound on the internal step; `None` leaves it to the controller.
    pub max_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            sample_dt: 1e-2,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            max_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64, sample_dt: f64) -> Self {
        Self {
            rtol,
            atol,
            sample_dt,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive(self.rtol, "rtol")?;
        positive(self.atol, "atol")?;
        positive(self.sample_dt, "sample_dt")?;
        positive(self.escape_radius, "escape_radius")?;
        if let Some(h) = self.max_step {
            positive(h, "max_step")?;
        }
        Ok(())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    Collision,
    Escape,
    StepFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Completed => "completed",
            Termination::Collision => "collision",
            Termination::Escape => "escape",
            Termination::StepFailure => "step-failure",
        })
    }
}

/// One output sample: the state and its Jacobi quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub state: PhaseState,
    pub jacobi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub params: SystemParams,
    pub termination: Termination,
}

impl Trajectory {
    /// Builds a trajectory from already computed states, annotating each with
    /// its Jacobi quantity. Times must be strictly increasing.
    pub fn from_states(
        params: SystemParams,
        states: impl IntoIterator<Item = PhaseState>,
        termination: Termination,
    ) -> Result<Self> {
        let mut samples: Vec<Sample> = Vec::new();
        for state in states {
            if let Some(last) = samples.last() {
                if !(state.t > last.state.t) {
                    return Err(domain(format!(
                        "sample times must be strictly increasing ({} after {})",
                        state.t, last.state.t
                    )));
                }
            }
            samples.push(Sample {
                state,
                jacobi: jacobi_constant(&params, &state)?,
            });
        }
        Ok(Self {
            samples,
            params,
            termination,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last_state(&self) -> Option<&PhaseState> {
        self.samples.last().map(|s| &s.state)
    }

    /// `dC/dt` at every sample.
    pub fn drift_rates(&self) -> Result<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| jacobi_drift_rate(&self.params, &s.state))
            .collect()
    }
}

/// Integrates the equations of motion from `s0` to `t_end`, sampling every
/// `cfg.sample_dt` (plus the end time) by cubic Hermite interpolation between
/// accepted steps.
///
/// Stops early on collision (closer than the collision guard), escape
/// (`r1 > cfg.escape_radius`) or step-size underflow; the state at the
/// stopping time is appended as the last sample.
pub fn integrate(
    p: &SystemParams,
    s0: &PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_end > s0.t && t_end.is_finite()) {
        return Err(domain(format!(
            "t_end = {t_end} must be finite and later than the initial time {}",
            s0.t
        )));
    }
    let start = equations_of_motion(p, s0).map_err(|e| match e {
        Error::Singularity { .. } => domain(format!("initial state is singular: {e}")),
        other => other,
    })?;

    let t0 = s0.t;
    let span = t_end - t0;
    let mut sample_times: Vec<f64> = (0..)
        .map(|k| t0 + k as f64 * cfg.sample_dt)
        .take_while(|&t| t <= t_end + 1e-9 * cfg.sample_dt)
        .map(|t| t.min(t_end))
        .collect();
    if t_end - sample_times.last().copied().unwrap_or(t0) > 1e-9 * cfg.sample_dt {
        sample_times.push(t_end);
    }

    let mut rhs = |t: f64, y: &Vec4| {
        equations_of_motion(p, &PhaseState::from_array(*y, t))
            .ok()
            .map(|d| d.to_array())
    };

    let h_max = cfg.max_step.unwrap_or(span).min(span);
    let mut stepper = Stepper::new(cfg.rtol, cfg.atol);
    let mut t = t0;
    let mut y = s0.to_array();
    let mut f = start.to_array();
    let mut h = stepper.initial_step(&mut rhs, t, &y, &f, h_max);

    let mut states = vec![*s0];
    let mut next_sample = 1;
    let mut steps = 0;
    let termination;

    loop {
        if next_sample >= sample_times.len() {
            termination = Termination::Completed;
            break;
        }
        steps += 1;
        let h_min = 1e-14 * t.abs().max(1.0);
        if steps > MAX_STEPS || h < h_min {
            termination = Termination::StepFailure;
            break;
        }
        let remaining = t_end - t;
        // avoid leaving a sliver before t_end
        let h_try = if h >= remaining || remaining - h < h_min {
            remaining
        } else {
            h.min(h_max)
        };

        match stepper.step(&mut rhs, t, &y, &f, h_try) {
            StepOutcome::Accepted {
                y_new,
                f_new,
                h_used,
                h_next,
            } => {
                let t_new = if h_try == remaining {
                    t_end
                } else {
                    t + h_used
                };
                while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                    let ts = sample_times[next_sample];
                    let ys = if ts == t_new {
                        y_new
                    } else {
                        hermite(&y, &f, &y_new, &f_new, t_new - t, (ts - t) / (t_new - t))
                    };
                    states.push(PhaseState::from_array(ys, ts));
                    next_sample += 1;
                }
                t = t_new;
                y = y_new;
                f = f_new;
                h = h_next.min(h_max);

                match distances(p, y[0], y[1]) {
                    Err(_) => {
                        termination = Termination::Collision;
                        break;
                    }
                    Ok((r1, _)) if r1 > cfg.escape_radius => {
                        termination = Termination::Escape;
                        break;
                    }
                    Ok(_) => {}
                }
            }
            StepOutcome::Rejected { h_next } => h = h_next,
            StepOutcome::RhsFailed => {
                h = 0.25 * h_try;
                if h < h_min {
                    termination = Termination::Collision;
                    break;
                }
            }
        }
    }

    if termination != Termination::Completed && states.last().is_some_and(|s| t > s.t) {
        states.push(PhaseState::from_array(y, t));
    }

    let mut samples = Vec::with_capacity(states.len());
    for state in states {
        // a collided final state has no finite Jacobi quantity
        let jacobi = match jacobi_constant(p, &state) {
            Ok(c) => c,
            Err(_) if termination == Termination::Collision => f64::NAN,
            Err(e) => return Err(e),
        };
        samples.push(Sample { state, jacobi });
    }
    Ok(Trajectory {
        samples,
        params: *p,
        termination,
    })
}

/// Result of checking a trajectory against the Jacobi identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum JacobiAudit {
    /// Drag-free: `max |C(t) - C(0)|`.
    Conservation(f64),
    /// With drag: largest relative mismatch between the finite-difference
    /// slope of `C` and the drift rate.
    DriftLaw(f64),
}

impl JacobiAudit {
    pub fn value(&self) -> f64 {
        match *self {
            JacobiAudit::Conservation(v) | JacobiAudit::DriftLaw(v) => v,
        }
    }
}

/// Checks the samples of `traj` against conservation of `C` (no drag) or
/// against `dC/dt = -2 (vx Fx + vy Fy)` (with drag).
///
/// In the drag case each interval's slope `(C[k+1] - C[k]) / dt` is compared
/// with the mean of the endpoint rates; intervals whose rate is below
/// [`DRIFT_RATE_FLOOR`] are skipped.
pub fn jacobi_audit(traj: &Trajectory) -> Result<JacobiAudit> {
    let samples: Vec<&Sample> = traj
        .samples
        .iter()
        .filter(|s| s.jacobi.is_finite())
        .collect();
    if samples.len() < 3 {
        return Err(domain(format!(
            "jacobi audit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if traj.params.w1() == 0.0 {
        let c0 = samples[0].jacobi;
        let max = samples
            .iter()
            .map(|s| (s.jacobi - c0).abs())
            .fold(0.0, f64::max);
        return Ok(JacobiAudit::Conservation(max));
    }

    let rates = samples
        .iter()
        .map(|s| jacobi_drift_rate(&traj.params, &s.state))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for k in 0..samples.len() - 1 {
        let rate = 0.5 * (rates[k] + rates[k + 1]);
        if rate.abs() < DRIFT_RATE_FLOOR {
            continue;
        }
        let dt = samples[k + 1].state.t - samples[k].state.t;
        let slope = (samples[k + 1].jacobi - samples[k].jacobi) / dt;
        worst = worst.max((slope - rate).abs() / rate.abs());
    }
    Ok(JacobiAudit::DriftLaw(worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn l4_classical(mu: f64) -> PhaseState {
        PhaseState::at_rest(0.5 - mu, 0.75f64.sqrt())
    }

    #[test]
    fn classical_l4_stays_put() {
        let p = SystemParams::classical(0.01).unwrap();
        let s0 = l4_classical(0.01);
        let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-12, 0.1);
        let traj = integrate(&p, &s0, 20.0 * PI, &cfg).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        let last = traj.last_state().unwrap();
        assert!((last.t - 20.0 * PI).abs() < 1e-12);
        for s in &traj.samples {
            let d = (s.state.x - s0.x).hypot(s.state.y - s0.y);
            assert!(d < 1e-8, "drift {d} at t = {}", s.state.t);
        }
    }

    #[test]
    fn sampling_grid() {
        let p = SystemParams::classical(0.1).unwrap();
        let s0 = PhaseState::new(0.3, 0.6, 0.01, 0.0, 1.0);
        let cfg = IntegratorConfig::with_tolerances(1e-9, 1e-9, 0.25);
        let traj = integrate(&p, &s0, 2.1, &cfg).unwrap();
        let times: Vec<f64> = traj.samples.iter().map(|s| s.state.t).collect();
        assert_eq!(times.len(), 6);
        assert_eq!(times[0], 1.0);
        assert_eq!(times[4], 2.0);
        assert_eq!(times[5], 2.1);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn invalid_inputs() {
        let p = SystemParams::classical(0.1).unwrap();
        let cfg = IntegratorConfig::default();
        let s0 = l4_classical(0.1);
        assert!(matches!(
            integrate(&p, &s0, 0.0, &cfg),
            Err(Error::Domain(_))
        ));
        let bad = IntegratorConfig { rtol: 0.0, ..cfg };
        assert!(integrate(&p, &s0, 1.0, &bad).is_err());
        let singular = PhaseState::at_rest(-0.1, 0.0);
        assert!(matches!(
            integrate(&p, &singular, 1.0, &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn escape_is_detected() {
        let p = SystemParams::classical(0.1).unwrap();
        let s0 = PhaseState::new(2.0, 0.0, 5.0, 0.0, 0.0);
        let cfg = IntegratorConfig {
            escape_radius: 10.0,
            ..IntegratorConfig::with_tolerances(1e-9, 1e-9, 0.1)
        };
        let traj = integrate(&p, &s0, 100.0, &cfg).unwrap();
        assert_eq!(traj.termination, Termination::Escape);
        let last = traj.last_state().unwrap();
        assert!((last.x + 0.1).hypot(last.y) > 10.0);
        assert!(last.t < 100.0);
    }

    #[test]
    fn collision_is_detected() {
        let p = SystemParams::classical(0.1)
            .unwrap()
            .with_collision_guard(0.05)
            .unwrap();
        // heading straight at the radiating primary from 0.2 away
        let s0 = PhaseState::new(0.1, 0.0, -3.0, 0.0, 0.0);
        let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-10, 0.01);
        let traj = integrate(&p, &s0, 5.0, &cfg).unwrap();
        assert_eq!(traj.termination, Termination::Collision);
        assert!(traj.last_state().unwrap().t < 0.2);
        // halving the tolerances keeps the classification
        let cfg2 = IntegratorConfig::with_tolerances(5e-11, 5e-11, 0.01);
        assert_eq!(
            integrate(&p, &s0, 5.0, &cfg2).unwrap().termination,
            Termination::Collision
        );
    }

    #[test]
    fn audit_trivial_cases() {
        let p = SystemParams::classical(0.1).unwrap();
        let s = l4_classical(0.1);
        let states = (0..5).map(|k| PhaseState { t: k as f64, ..s });
        let traj = Trajectory::from_states(p, states.clone(), Termination::Completed).unwrap();
        assert_eq!(jacobi_audit(&traj).unwrap(), JacobiAudit::Conservation(0.0));

        let pd = SystemParams::with_w1(0.1, 0.9, 0.0, 1e-3).unwrap();
        let traj = Trajectory::from_states(pd, states, Termination::Completed).unwrap();
        assert_eq!(jacobi_audit(&traj).unwrap(), JacobiAudit::DriftLaw(0.0));

        let short =
            Trajectory::from_states(p, [s, PhaseState { t: 1.0, ..s }], Termination::Completed)
                .unwrap();
        assert!(jacobi_audit(&short).is_err());

        assert!(Trajectory::from_states(p, [s, s], Termination::Completed).is_err());
    }

    #[test]
    fn drift_near_l4() {
        let p = SystemParams::with_w1(0.01, 0.9, 0.0, 1e-3).unwrap();
        let base =
            crate::equilibria::photogravitational_base(&p, crate::equilibria::Branch::L4).unwrap();
        let s0 = PhaseState::new(base.x, base.y, 0.05, 0.02, 0.0);
        let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-12, 1e-3);
        // the rate changes sign near t = 1.4, where a relative audit is meaningless
        let traj = integrate(&p, &s0, 1.0, &cfg).unwrap();
        let JacobiAudit::DriftLaw(m) = jacobi_audit(&traj).unwrap() else {
            panic!("expected drift audit");
        };
        assert!(m < 1e-4, "mismatch {m}");
        let c: Vec<f64> = traj.samples.iter().map(|s| s.jacobi).collect();
        assert!(c.windows(2).any(|w| w[0] != w[1]));
    }
}
