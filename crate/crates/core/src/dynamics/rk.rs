//! Dormand-Prince 5(4) with PI step-size control.

/// Butcher tableau nodes.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (same as the last row of `A`, FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

pub(crate) type Vec4 = [f64; 4];

/// Outcome of one attempted step.
pub(crate) enum StepOutcome {
    Accepted {
        y_new: Vec4,
        f_new: Vec4,
        h_used: f64,
        h_next: f64,
    },
    Rejected {
        h_next: f64,
    },
    /// The right-hand side could not be evaluated at a stage.
    RhsFailed,
}

pub(crate) struct Stepper {
    rtol: f64,
    atol: f64,
    err_prev: f64,
}

fn axpy(y: &Vec4, h: f64, coeffs: &[f64], k: &[Vec4]) -> Vec4 {
    let mut out = *y;
    for (c, ki) in coeffs.iter().zip(k) {
        if *c != 0.0 {
            for i in 0..4 {
                out[i] += h * c * ki[i];
            }
        }
    }
    out
}

impl Stepper {
    pub(crate) fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            err_prev: 1e-4,
        }
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs())
    }

    /// Initial step guess after Hairer, Norsett & Wanner (II.4).
    pub(crate) fn initial_step<F>(
        &self,
        rhs: &mut F,
        t: f64,
        y: &Vec4,
        f0: &Vec4,
        h_max: f64,
    ) -> f64
    where
        F: FnMut(f64, &Vec4) -> Option<Vec4>,
    {
        let rms = |v: &Vec4| {
            (v.iter()
                .zip(y)
                .map(|(vi, yi)| (vi / self.scale(*yi, *yi)).powi(2))
                .sum::<f64>()
                / 4.0)
                .sqrt()
        };
        let d0 = rms(y);
        let d1 = rms(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(h_max);
        let y1 = axpy(y, h0, &[1.0], std::slice::from_ref(f0));
        let Some(f1) = rhs(t + h0, &y1) else {
            return h0 * 1e-3;
        };
        let diff: Vec4 = std::array::from_fn(|i| f1[i] - f0[i]);
        let d2 = rms(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(h_max)
    }

    pub(crate) fn step<F>(
        &mut self,
        rhs: &mut F,
        t: f64,
        y: &Vec4,
        f0: &Vec4,
        h: f64,
    ) -> StepOutcome
    where
        F: FnMut(f64, &Vec4) -> Option<Vec4>,
    {
        let mut k = [[0.0; 4]; 7];
        k[0] = *f0;
        for s in 1..7 {
            let ys = axpy(y, h, &A[s][..s], &k[..s]);
            match rhs(t + C[s] * h, &ys) {
                Some(v) => k[s] = v,
                None => return StepOutcome::RhsFailed,
            }
        }
        let y_new = axpy(y, h, &B, &k);
        let err_vec = axpy(&[0.0; 4], h, &E, &k);
        let err = (err_vec
            .iter()
            .enumerate()
            .map(|(i, e)| (e / self.scale(y[i], y_new[i])).powi(2))
            .sum::<f64>()
            / 4.0)
            .sqrt();

        if err <= 1.0 {
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-ALPHA) * self.err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
            };
            self.err_prev = err.max(1e-4);
            StepOutcome::Accepted {
                y_new,
                f_new: k[6],
                h_used: h,
                h_next: h * fac,
            }
        } else {
            let fac = (SAFETY * err.powf(-ALPHA)).max(FAC_MIN);
            StepOutcome::Rejected { h_next: h * fac }
        }
    }
}

/// Cubic Hermite interpolation on `[t0, t0 + h]` at fraction `s`.
pub(crate) fn hermite(y0: &Vec4, f0: &Vec4, y1: &Vec4, f1: &Vec4, h: f64, s: f64) -> Vec4 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    // Harmonic oscillator x'' = -x in both coordinate pairs.
    fn oscillator(_t: f64, y: &Vec4) -> Option<Vec4> {
        Some([y[2], y[3], -y[0], -y[1]])
    }

    #[test]
    fn tableau_consistency() {
        for s in 0..7 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-15, "row {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn oscillator_accuracy() {
        let mut rhs = oscillator;
        let mut stepper = Stepper::new(1e-10, 1e-10);
        let mut y = [1.0, 0.0, 0.0, 1.0];
        let mut f = rhs(0.0, &y).unwrap();
        let mut t = 0.0;
        let t_end = 2.0 * std::f64::consts::PI;
        let mut h = stepper.initial_step(&mut rhs, t, &y, &f, 1.0);
        while t < t_end {
            let h_try = h.min(t_end - t);
            match stepper.step(&mut rhs, t, &y, &f, h_try) {
                StepOutcome::Accepted {
                    y_new,
                    f_new,
                    h_used,
                    h_next,
                } => {
                    t += h_used;
                    y = y_new;
                    f = f_new;
                    h = h_next;
                }
                StepOutcome::Rejected { h_next } => h = h_next,
                StepOutcome::RhsFailed => unreachable!(),
            }
        }
        assert!((y[0] - 1.0).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
        assert!(y[2].abs() < 1e-8);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        // p(t) = t^3 - 2t, p' = 3t^2 - 2 on [0.5, 1.5]
        let p = |t: f64| t * t * t - 2.0 * t;
        let dp = |t: f64| 3.0 * t * t - 2.0;
        let (t0, h) = (0.5, 1.0);
        let y0 = [p(t0); 4];
        let f0 = [dp(t0); 4];
        let y1 = [p(t0 + h); 4];
        let f1 = [dp(t0 + h); 4];
        for s in [0.0, 0.25, 0.6, 1.0] {
            let v = hermite(&y0, &f0, &y1, &f1, h, s);
            assert!((v[0] - p(t0 + s * h)).abs() < 1e-14);
        }
    }
}
