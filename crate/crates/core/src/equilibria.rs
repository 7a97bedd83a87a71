//! Triangular equilibrium points L4/L5.
//!
//! Two routes are provided. The analytic route perturbs the photogravitational
//! triangular point (`r1 = q1^(1/3)`, `r2 = 1`) to first order in the drag
//! strength `W1` and the oblateness `A2`. The numeric route solves the
//! stationarity conditions exactly with a damped Newton iteration and serves
//! as ground truth for the analytic one.
//!
//! The photogravitational base point used here is
//! `x0 = delta^2/2 - mu`, `y0 = ±delta (1 - delta^2/4)^(1/2)`, which is what
//! the geometry `r1 = delta`, `r2 = 1` gives.

use std::fmt;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{conservative_gradient, distances, SystemParams};

/// Default residual tolerance for Newton refinement.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap for Newton refinement.
pub const DEFAULT_MAX_ITER: usize = 50;

const MAX_HALVINGS: usize = 20;
/// Newton iterates may not wander farther than this from the guess.
pub const REFINE_RADIUS: f64 = 0.25;
const EPS_WARN: f64 = 0.1;

/// Which of the two triangular points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    L4,
    L5,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::L4, Branch::L5];

    /// `+1` above the x-axis, `-1` below.
    pub fn sign(self) -> f64 {
        match self {
            Branch::L4 => 1.0,
            Branch::L5 => -1.0,
        }
    }

    pub fn of_y(y: f64) -> Option<Branch> {
        if y > 0.0 {
            Some(Branch::L4)
        } else if y < 0.0 {
            Some(Branch::L5)
        } else {
            None
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::L4 => "L4",
            Branch::L5 => "L5",
        })
    }
}

/// The closed-form special cases of the analytic solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitingCase {
    /// No drag (`W1 = 0`); radiation and oblateness only.
    OblateOnly,
    /// Spherical secondary (`A2 = 0`); radiation and drag only.
    DragOnly,
    /// `q1 = 1`, `A2 = 0`, `W1 = 0`.
    Classical,
}

impl LimitingCase {
    pub const ALL: [LimitingCase; 3] = [
        LimitingCase::OblateOnly,
        LimitingCase::DragOnly,
        LimitingCase::Classical,
    ];

    /// Whether the case's parameter constraints hold for `p`.
    pub fn applies_to(self, p: &SystemParams) -> bool {
        match self {
            LimitingCase::OblateOnly => p.w1() == 0.0,
            LimitingCase::DragOnly => p.a2() == 0.0,
            LimitingCase::Classical => p.w1() == 0.0 && p.a2() == 0.0 && p.q1() == 1.0,
        }
    }
}

impl fmt::Display for LimitingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitingCase::OblateOnly => "oblate-only",
            LimitingCase::DragOnly => "drag-only",
            LimitingCase::Classical => "classical",
        })
    }
}

/// How an [`EquilibriumPoint`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AnalyticFirstOrder,
    PhotogravitationalBase,
    RefinedNumeric,
    LimitingCase(LimitingCase),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::AnalyticFirstOrder => f.write_str("analytic-first-order"),
            Method::PhotogravitationalBase => f.write_str("photogravitational-base"),
            Method::RefinedNumeric => f.write_str("refined-numeric"),
            Method::LimitingCase(c) => write!(f, "case-{c}"),
        }
    }
}

/// A located triangular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub x: f64,
    pub y: f64,
    pub label: Branch,
    pub method: Method,
    /// Euclidean norm of the stationarity residual at `(x, y)`.
    pub residual_norm: f64,
}

impl EquilibriumPoint {
    fn evaluate(p: &SystemParams, x: f64, y: f64, method: Method) -> Result<Self> {
        let label = Branch::of_y(y)
            .ok_or_else(|| domain(format!("point ({x}, {y}) is not triangular (y = 0)")))?;
        let (r1, r2) = equilibrium_residual(p, x, y)?;
        Ok(Self {
            x,
            y,
            label,
            method,
            residual_norm: r1.hypot(r2),
        })
    }

    pub fn distance_to(&self, other: &EquilibriumPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// First-order perturbation of the photogravitational triangular point:
/// `r1 = delta (1 + eps1)`, `r2 = 1 + eps2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationTerms {
    pub eps1: f64,
    pub eps2: f64,
    pub x0: f64,
    pub y0: f64,
}

impl PerturbationTerms {
    /// False when either perturbation exceeds 0.1 and the first-order
    /// expansion should not be trusted.
    pub fn in_validity_regime(&self) -> bool {
        self.eps1.abs() <= EPS_WARN && self.eps2.abs() <= EPS_WARN
    }
}

fn base_coordinates(p: &SystemParams, branch: Branch) -> (f64, f64) {
    let d = p.delta();
    let x0 = 0.5 * d * d - p.mu();
    let y0 = branch.sign() * d * (1.0 - 0.25 * d * d).sqrt();
    (x0, y0)
}

/// Triangular point of the photogravitational problem (no drag, no
/// oblateness), evaluated against the full residual of `p`.
pub fn photogravitational_base(p: &SystemParams, branch: Branch) -> Result<EquilibriumPoint> {
    let (x0, y0) = base_coordinates(p, branch);
    EquilibriumPoint::evaluate(p, x0, y0, Method::PhotogravitationalBase)
}

/// The perturbations `eps1`, `eps2` of `r1`, `r2` together with the base point.
///
/// Both drag contributions are odd in `y0`, so they flip sign between L4 and L5.
pub fn analytic_epsilons(p: &SystemParams, branch: Branch) -> PerturbationTerms {
    let (x0, y0) = base_coordinates(p, branch);
    let (mu, a2, nw) = (p.mu(), p.a2(), p.n() * p.w1());
    let eps2 = nw * (1.0 - 2.5 * a2) / (3.0 * mu * y0);
    let eps1 = -nw / (6.0 * (1.0 - mu) * y0) - 0.5 * a2;
    PerturbationTerms { eps1, eps2, x0, y0 }
}

/// First-order analytic location of L4/L5 under drag and oblateness. Logs a
/// warning when the perturbations are outside the first-order regime.
pub fn analytic_triangular_point(p: &SystemParams, branch: Branch) -> Result<EquilibriumPoint> {
    let terms = analytic_epsilons(p, branch);
    if !terms.in_validity_regime() {
        log::warn!(
            "{branch}: first-order perturbations are large (eps1 = {:e}, eps2 = {:e}); \
             the analytic point is unreliable",
            terms.eps1,
            terms.eps2
        );
    }
    first_order_point(p, &terms)
}

fn first_order_point(p: &SystemParams, terms: &PerturbationTerms) -> Result<EquilibriumPoint> {
    let PerturbationTerms { x0, y0, .. } = *terms;
    if x0.abs() < 1e-12 {
        return Err(Error::DegenerateFormula(format!(
            "x0 = delta^2/2 - mu = {x0:e} vanishes; the analytic x-coordinate divides by it"
        )));
    }
    let (mu, a2, n, w1) = (p.mu(), p.a2(), p.n(), p.w1());
    let d2 = p.delta() * p.delta();
    let h = 0.5 * d2;
    let denom = 3.0 * mu * (1.0 - mu);

    let x_bracket = (1.0 - mu) * (1.0 - 2.5 * a2) + mu * (1.0 - 0.5 * a2) * h;
    let x = x0 * (1.0 - n * w1 * x_bracket / (denom * y0 * x0) - h * a2 / x0);

    let y_bracket = 2.0 * mu - 1.0 - mu * (1.0 - 1.5 * a2) * h + 3.5 * (1.0 - mu) * a2;
    let inner =
        1.0 - n * w1 * d2 * y_bracket / (denom * y0.powi(3)) - d2 * (1.0 - h) * a2 / (y0 * y0);
    if inner <= 0.0 {
        return Err(Error::DegenerateFormula(format!(
            "square-root argument {inner:e} of the analytic y-coordinate is not positive"
        )));
    }
    let y = y0 * inner.sqrt();
    EquilibriumPoint::evaluate(p, x, y, Method::AnalyticFirstOrder)
}

/// Left-hand sides of the two stationarity conditions at `(x, y)`.
///
/// This is the particle's acceleration at rest: the amended-potential gradient
/// plus the drag evaluated at zero velocity, `(+W1 n y / r1^2, -W1 n (x+mu) / r1^2)`.
pub fn equilibrium_residual(p: &SystemParams, x: f64, y: f64) -> Result<(f64, f64)> {
    let g = conservative_gradient(p, x, y)?;
    let (r1, _) = distances(p, x, y)?;
    let k = p.w1() * p.n() / (r1 * r1);
    Ok((g.ax + k * y, g.ay - k * (x + p.mu())))
}

fn residual_vec(p: &SystemParams, z: [f64; 2]) -> Result<[f64; 2]> {
    let (a, b) = equilibrium_residual(p, z[0], z[1])?;
    Ok([a, b])
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Central-difference Jacobian of the residual, step `sqrt(eps) * max(|z_i|, 1)`.
fn jacobian(p: &SystemParams, z: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let mut jac = [[0.0; 2]; 2];
    for col in 0..2 {
        let h = f64::EPSILON.sqrt() * z[col].abs().max(1.0);
        let mut plus = z;
        let mut minus = z;
        plus[col] += h;
        minus[col] -= h;
        // actual spacing after rounding
        let span = plus[col] - minus[col];
        let fp = residual_vec(p, plus)?;
        let fm = residual_vec(p, minus)?;
        for row in 0..2 {
            jac[row][col] = (fp[row] - fm[row]) / span;
        }
    }
    Ok(jac)
}

/// Solves the stationarity conditions from `guess` by damped Newton iteration.
///
/// The step is halved (up to 20 times) whenever it fails to reduce the
/// residual norm. This is a local polish: an iterate leaving the disc of
/// radius [`REFINE_RADIUS`] around the guess, or a root on or across the
/// x-axis, is reported as non-convergence rather than returned.
pub fn refine_equilibrium(
    p: &SystemParams,
    guess: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumPoint> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be > 0, got {tol}")));
    }
    let side = Branch::of_y(guess.1)
        .ok_or_else(|| domain("initial guess lies on the x-axis; triangular points need y != 0"))?;

    let mut z = [guess.0, guess.1];
    let mut f = residual_vec(p, z)?;
    let mut fnorm = norm(f);
    let mut iterations = 0;

    while fnorm >= tol {
        if iterations == max_iter {
            return Err(Error::Convergence {
                x: z[0],
                y: z[1],
                residual: fnorm,
                iterations,
            });
        }
        iterations += 1;

        let j = jacobian(p, z)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(det.abs() > 1e-14 * scale * scale) {
            return Err(Error::SingularJacobian {
                x: z[0],
                y: z[1],
                determinant: det,
            });
        }
        let step = [
            (j[1][1] * f[0] - j[0][1] * f[1]) / det,
            (j[0][0] * f[1] - j[1][0] * f[0]) / det,
        ];

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = [z[0] - lambda * step[0], z[1] - lambda * step[1]];
            // stepping into a primary counts as no decrease
            if (trial[0] - guess.0).hypot(trial[1] - guess.1) > REFINE_RADIUS {
                lambda *= 0.5;
                continue;
            }
            if let Ok(ft) = residual_vec(p, trial) {
                let tn = norm(ft);
                if tn < fnorm {
                    accepted = Some((trial, ft, tn));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, ft, tn)) => {
                z = trial;
                f = ft;
                fnorm = tn;
            }
            None => {
                return Err(Error::Convergence {
                    x: z[0],
                    y: z[1],
                    residual: fnorm,
                    iterations,
                })
            }
        }
    }

    if z[1].abs() < 1e-9 || Branch::of_y(z[1]) != Some(side) {
        return Err(Error::Convergence {
            x: z[0],
            y: z[1],
            residual: fnorm,
            iterations,
        });
    }
    EquilibriumPoint::evaluate(p, z[0], z[1], Method::RefinedNumeric)
}

/// Analytic point refined by Newton iteration. When the analytic formula is
/// degenerate (`x0 = 0`) the seed is taken from the analytic point of a
/// slightly shifted mass parameter.
pub fn locate_triangular_point(
    p: &SystemParams,
    branch: Branch,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumPoint> {
    let seed = match first_order_point(p, &analytic_epsilons(p, branch)) {
        Ok(pt) => pt,
        Err(Error::DegenerateFormula(_)) => {
            let mu = p.mu();
            let shifted = if mu + 1e-6 <= 0.5 {
                mu + 1e-6
            } else {
                mu - 1e-6
            };
            let nearby = SystemParams::with_w1(shifted, p.q1(), p.a2(), p.w1())?;
            first_order_point(&nearby, &analytic_epsilons(&nearby, branch))?
        }
        Err(e) => return Err(e),
    };
    refine_equilibrium(p, (seed.x, seed.y), tol, max_iter)
}

/// The closed-form special cases, evaluated directly.
///
/// * oblate-only: `x = x0 - (delta^2/2) A2`, `y^2 = y0^2 - delta^2 (1 - delta^2/2) A2`
/// * drag-only: `x = x0 {1 - W1 [(1-mu) + mu delta^2/2] / (3 mu (1-mu) x0 y0)}`,
///   `y^2 = y0^2 - W1 delta^2 [2mu - 1 - mu delta^2/2] / (3 mu (1-mu) y0)`
/// * classical: `(1/2 - mu, ±sqrt(3)/2)`
pub fn limiting_case_point(
    p: &SystemParams,
    case: LimitingCase,
    branch: Branch,
) -> Result<EquilibriumPoint> {
    if !case.applies_to(p) {
        return Err(domain(format!(
            "limiting case {case} does not apply (q1 = {}, a2 = {}, w1 = {})",
            p.q1(),
            p.a2(),
            p.w1()
        )));
    }
    let sign = branch.sign();
    let mu = p.mu();
    let d2 = p.delta() * p.delta();
    let (x0, y0) = base_coordinates(p, branch);
    let (x, y) = match case {
        LimitingCase::Classical => (0.5 - mu, sign * 0.75f64.sqrt()),
        LimitingCase::OblateOnly => {
            let a2 = p.a2();
            let ysq = y0 * y0 - d2 * (1.0 - 0.5 * d2) * a2;
            (x0 - 0.5 * d2 * a2, sign * ysq.sqrt())
        }
        LimitingCase::DragOnly => {
            let w1 = p.w1();
            let denom = 3.0 * mu * (1.0 - mu);
            let x = x0 * (1.0 - w1 * ((1.0 - mu) + mu * 0.5 * d2) / (denom * x0 * y0));
            let ysq = y0 * y0 - w1 * d2 * (2.0 * mu - 1.0 - mu * 0.5 * d2) / (denom * y0);
            (x, sign * ysq.sqrt())
        }
    };
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::DegenerateFormula(format!(
            "closed form for case {case} is not finite for these parameters"
        )));
    }
    EquilibriumPoint::evaluate(p, x, y, Method::LimitingCase(case))
}
