//! Adaptive Dormand–Prince 5(4) stepper for a scalar ODE `y' = f(u, y)`.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
// Difference between the fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 10_000_000;

/// Result of advancing towards a target abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Advance {
    Reached(f64),
    /// Integration cannot continue past `u`; `y` is the last admissible state.
    Stopped { u: f64, y: f64 },
}

pub(crate) struct Stepper<F, V>
where
    F: Fn(f64, f64) -> Option<f64>,
    V: Fn(f64, f64) -> bool,
{
    rhs: F,
    admissible: V,
    rtol: f64,
    atol: f64,
    h: Option<f64>,
}

impl<F, V> Stepper<F, V>
where
    F: Fn(f64, f64) -> Option<f64>,
    V: Fn(f64, f64) -> bool,
{
    pub(crate) fn new(rhs: F, admissible: V, rtol: f64, atol: f64) -> Self {
        Self {
            rhs,
            admissible,
            rtol,
            atol,
            h: None,
        }
    }

    fn try_step(&self, u: f64, y: f64, h: f64) -> Option<(f64, f64)> {
        let mut k = [0.0; 7];
        k[0] = (self.rhs)(u, y)?;
        for s in 1..7 {
            let incr: f64 = (0..s).map(|j| A[s][j] * k[j]).sum();
            k[s] = (self.rhs)(u + C[s] * h, y + h * incr)?;
        }
        let y_new = y + h * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
        let err = h * (0..7).map(|j| E[j] * k[j]).sum::<f64>();
        let tol = self.atol + self.rtol * y.abs().max(y_new.abs());
        let norm = (err / tol).abs();
        if y_new.is_finite() && norm.is_finite() {
            Some((y_new, norm))
        } else {
            None
        }
    }

    /// Integrates from `(u, y)` to `target`, stopping early at the first
    /// inadmissible state or when the step size collapses.
    pub(crate) fn advance(&mut self, mut u: f64, mut y: f64, target: f64) -> Advance {
        if u == target {
            return Advance::Reached(y);
        }
        let dir = (target - u).signum();
        let mut h = match self.h {
            Some(h) => h.abs(),
            None => {
                let slope = (self.rhs)(u, y).map_or(1.0, f64::abs);
                0.01 * (1.0 + y.abs()) / slope.max(1e-12)
            }
        };
        for _ in 0..MAX_STEPS {
            let remaining = (target - u).abs();
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            let floor = 1e-14 * u.abs().max(1.0);
            if remaining <= floor {
                // Nodes closer than round-off: one Euler step is exact enough.
                return match (self.rhs)(u, y) {
                    Some(f) => Advance::Reached(y + f * (target - u)),
                    None => Advance::Stopped { u, y },
                };
            }
            if step < floor {
                return Advance::Stopped { u, y };
            }
            match self.try_step(u, y, dir * step) {
                Some((y_new, norm)) if norm <= 1.0 => {
                    let u_new = if clipped { target } else { u + dir * step };
                    if !(self.admissible)(u_new, y_new) {
                        // Refine towards the boundary before giving up.
                        if step > 1e3 * floor {
                            h = step * 0.25;
                            continue;
                        }
                        return Advance::Stopped { u, y };
                    }
                    let grow = if norm == 0.0 {
                        5.0
                    } else {
                        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    let proposal = step * grow;
                    h = if clipped { h.max(proposal) } else { proposal };
                    self.h = Some(h);
                    u = u_new;
                    y = y_new;
                    if clipped {
                        return Advance::Reached(y);
                    }
                }
                Some((_, norm)) => {
                    h = step * (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9);
                }
                None => {
                    h = step * 0.25;
                }
            }
        }
        Advance::Stopped { u, y }
    }
}
