use serde::Serialize;

use crate::error::{domain, Result};

/// Closest approach to either primary below which evaluations are refused.
pub const DEFAULT_COLLISION_GUARD: f64 = 1e-6;

/// Constant of the CGS grain formula `q = 1 - K chi / (a rho)`.
pub const GRAIN_PRESSURE_CONSTANT: f64 = 5.6e-5;

/// Perturbed mean motion `n = sqrt(1 + 3 A2 / 2)` of the primaries.
pub fn mean_motion(a2: f64) -> Result<f64> {
    if !(a2.is_finite() && a2 >= 0.0) {
        return Err(domain(format!(
            "oblateness a2 must be finite and >= 0, got {a2}"
        )));
    }
    Ok((1.0 + 1.5 * a2).sqrt())
}

/// Poynting-Robertson drag strength `W1 = (1 - mu)(1 - q1) / cd`.
pub fn drag_coefficient(mu: f64, q1: f64, cd: f64) -> Result<f64> {
    check_mu(mu)?;
    check_q1(q1)?;
    check_cd(cd)?;
    if q1 == 1.0 {
        return Ok(0.0);
    }
    Ok((1.0 - mu) * (1.0 - q1) / cd)
}

/// Oblateness coefficient `A2 = (re^2 - rp^2) / (5 r^2)` from the secondary's
/// equatorial and polar radii and the separation of the primaries.
pub fn oblateness_from_radii(re: f64, rp: f64, r: f64) -> Result<f64> {
    if !(rp > 0.0 && re.is_finite() && r > 0.0 && r.is_finite()) {
        return Err(domain(format!(
            "radii must be positive and finite, got re={re}, rp={rp}, r={r}"
        )));
    }
    if rp > re {
        return Err(domain(format!(
            "polar radius {rp} exceeds equatorial radius {re}"
        )));
    }
    Ok((re * re - rp * rp) / (5.0 * r * r))
}

/// Physical properties of a dust grain, in CGS units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrainProperties {
    /// Radius in cm.
    pub radius_a: f64,
    /// Density in g/cm^3.
    pub density_rho: f64,
    /// Radiation-pressure efficiency factor.
    pub efficiency_chi: f64,
}

impl GrainProperties {
    pub fn new(radius_a: f64, density_rho: f64, efficiency_chi: f64) -> Result<Self> {
        let g = Self {
            radius_a,
            density_rho,
            efficiency_chi,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius_a > 0.0 && self.radius_a.is_finite()) {
            return Err(domain(format!(
                "grain radius must be > 0, got {}",
                self.radius_a
            )));
        }
        if !(self.density_rho > 0.0 && self.density_rho.is_finite()) {
            return Err(domain(format!(
                "grain density must be > 0, got {}",
                self.density_rho
            )));
        }
        // chi = 0 is the radiation-free limit and is accepted.
        if !(self.efficiency_chi >= 0.0 && self.efficiency_chi.is_finite()) {
            return Err(domain(format!(
                "radiation-pressure efficiency must be >= 0, got {}",
                self.efficiency_chi
            )));
        }
        Ok(())
    }
}

/// Mass-reduction factor of a grain, `q = 1 - 5.6e-5 chi / (a rho)`.
///
/// A grain with `q <= 0` is pushed outward by radiation pressure harder than
/// it is attracted and has no meaningful equilibrium; this is reported as a
/// domain error.
pub fn mass_reduction_from_grain(g: &GrainProperties) -> Result<f64> {
    g.validate()?;
    let q = 1.0 - GRAIN_PRESSURE_CONSTANT * g.efficiency_chi / (g.radius_a * g.density_rho);
    if q <= 0.0 {
        return Err(domain(format!(
            "grain is blown out by radiation pressure (q = {q})"
        )));
    }
    Ok(q)
}

/// Dimensionless definition of the problem.
///
/// The derived quantities `n`, `w1` and `delta` are computed once on
/// construction and cannot be set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    mu: f64,
    q1: f64,
    a2: f64,
    cd: Option<f64>,
    n: f64,
    w1: f64,
    delta: f64,
    collision_guard: f64,
}

impl SystemParams {
    /// Builds the system from the dimensionless speed of light, deriving `W1`.
    pub fn new(mu: f64, q1: f64, a2: f64, cd: f64) -> Result<Self> {
        let w1 = drag_coefficient(mu, q1, cd)?;
        Self::build(mu, q1, a2, Some(cd), w1)
    }

    /// Builds the system from the drag strength `W1` directly.
    ///
    /// `cd` is back-derived when `w1 > 0`. With `w1 = 0` drag is switched off
    /// and `cd` is left undefined. `q1 = 1` admits only `w1 = 0`.
    pub fn with_w1(mu: f64, q1: f64, a2: f64, w1: f64) -> Result<Self> {
        check_mu(mu)?;
        check_q1(q1)?;
        if !(w1.is_finite() && w1 >= 0.0) {
            return Err(domain(format!("w1 must be finite and >= 0, got {w1}")));
        }
        if q1 == 1.0 && w1 != 0.0 {
            return Err(domain(format!(
                "q1 = 1 means no radiation pressure, so w1 must be 0 (got {w1})"
            )));
        }
        let cd = (w1 > 0.0).then(|| (1.0 - mu) * (1.0 - q1) / w1);
        Self::build(mu, q1, a2, cd, w1)
    }

    /// Classical circular problem: no radiation, no oblateness, no drag.
    pub fn classical(mu: f64) -> Result<Self> {
        Self::with_w1(mu, 1.0, 0.0, 0.0)
    }

    fn build(mu: f64, q1: f64, a2: f64, cd: Option<f64>, w1: f64) -> Result<Self> {
        let n = mean_motion(a2)?;
        Ok(Self {
            mu,
            q1,
            a2,
            cd,
            n,
            w1,
            delta: q1.cbrt(),
            collision_guard: DEFAULT_COLLISION_GUARD,
        })
    }

    /// Same system with a different collision guard radius.
    pub fn with_collision_guard(mut self, guard: f64) -> Result<Self> {
        if !(guard > 0.0 && guard.is_finite()) {
            return Err(domain(format!("collision guard must be > 0, got {guard}")));
        }
        self.collision_guard = guard;
        Ok(self)
    }

    /// Same system with `W1` replaced, keeping `mu`, `q1`, `a2` and the guard.
    pub fn replace_w1(&self, w1: f64) -> Result<Self> {
        Self::with_w1(self.mu, self.q1, self.a2, w1)?.with_collision_guard(self.collision_guard)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// Dimensionless speed of light; `None` when drag is switched off.
    pub fn cd(&self) -> Option<f64> {
        self.cd
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    /// `q1^(1/3)`, the distance from the radiating primary to the
    /// photogravitational triangular points.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn collision_guard(&self) -> f64 {
        self.collision_guard
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 0.5) {
        return Err(domain(format!(
            "mass parameter mu must lie in (0, 1/2], got {mu}"
        )));
    }
    Ok(())
}

fn check_q1(q1: f64) -> Result<()> {
    if !(q1 > 0.0 && q1 <= 1.0) {
        return Err(domain(format!(
            "mass-reduction factor q1 must lie in (0, 1], got {q1}"
        )));
    }
    Ok(())
}

fn check_cd(cd: f64) -> Result<()> {
    if !(cd > 0.0 && cd.is_finite()) {
        return Err(domain(format!(
            "speed of light cd must be positive and finite, got {cd}"
        )));
    }
    Ok(())
}
