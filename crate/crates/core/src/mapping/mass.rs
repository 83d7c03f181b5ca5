use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{check_increasing, uniform_grid, DiffOperator, STENCIL_WIDTH};

fn one() -> f64 {
    1.0
}

/// Dimensionless mass profile `m(u) > 0` with analytic `m'` and `m''`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MassProfile {
    /// `m(u) = m0`.
    Constant {
        #[serde(default = "one")]
        m0: f64,
    },
    /// `m(u) = m0 exp(κ u)`.
    Exponential {
        #[serde(default = "one")]
        m0: f64,
        kappa: f64,
    },
    /// `m(u) = m0 / (1 + κ u²)`.
    Rational {
        #[serde(default = "one")]
        m0: f64,
        kappa: f64,
    },
    /// `m(u) = m0 (1 + A sech²(κ u))`.
    Sech2 {
        #[serde(default = "one")]
        m0: f64,
        amplitude: f64,
        kappa: f64,
    },
    /// Sampled profile, interpolated by C² quintic Hermite pieces.
    Tabulated(TabulatedMass),
}

impl Default for MassProfile {
    fn default() -> Self {
        MassProfile::Constant { m0: 1.0 }
    }
}

impl MassProfile {
    pub fn constant(m0: f64) -> Self {
        MassProfile::Constant { m0 }
    }

    pub fn exponential(m0: f64, kappa: f64) -> Self {
        MassProfile::Exponential { m0, kappa }
    }

    pub fn rational(m0: f64, kappa: f64) -> Self {
        MassProfile::Rational { m0, kappa }
    }

    pub fn sech2(m0: f64, amplitude: f64, kappa: f64) -> Self {
        MassProfile::Sech2 {
            m0,
            amplitude,
            kappa,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            MassProfile::Constant { .. } => "constant",
            MassProfile::Exponential { .. } => "exponential",
            MassProfile::Rational { .. } => "rational",
            MassProfile::Sech2 { .. } => "sech2",
            MassProfile::Tabulated(_) => "tabulated",
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            MassProfile::Constant { .. } => true,
            MassProfile::Exponential { kappa, .. } | MassProfile::Rational { kappa, .. } => {
                *kappa == 0.0
            }
            MassProfile::Sech2 {
                amplitude, kappa, ..
            } => *amplitude == 0.0 || *kappa == 0.0,
            MassProfile::Tabulated(_) => false,
        }
    }

    /// `(m, m', m'')` at `u`.
    pub fn eval(&self, u: f64) -> [f64; 3] {
        match *self {
            MassProfile::Constant { m0 } => [m0, 0.0, 0.0],
            MassProfile::Exponential { m0, kappa } => {
                let m = m0 * (kappa * u).exp();
                [m, kappa * m, kappa * kappa * m]
            }
            MassProfile::Rational { m0, kappa } => {
                let q = 1.0 + kappa * u * u;
                [
                    m0 / q,
                    -2.0 * kappa * u * m0 / (q * q),
                    m0 * (6.0 * kappa * kappa * u * u - 2.0 * kappa) / (q * q * q),
                ]
            }
            MassProfile::Sech2 {
                m0,
                amplitude,
                kappa,
            } => {
                let s = 1.0 / (kappa * u).cosh();
                let t = (kappa * u).tanh();
                let s2 = s * s;
                [
                    m0 * (1.0 + amplitude * s2),
                    -2.0 * m0 * amplitude * kappa * s2 * t,
                    m0 * amplitude * kappa * kappa * (4.0 * s2 * t * t - 2.0 * s2 * s2),
                ]
            }
            MassProfile::Tabulated(ref table) => table.eval(u),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.eval(u)[0]
    }

    pub fn d1(&self, u: f64) -> f64 {
        self.eval(u)[1]
    }

    pub fn d2(&self, u: f64) -> f64 {
        self.eval(u)[2]
    }

    /// Checks parameters and positivity of `m` on `[a, b]` (probed on 2001 points).
    pub fn validate_on(&self, a: f64, b: f64) -> Result<()> {
        let params: Vec<f64> = match *self {
            MassProfile::Constant { m0 } => vec![m0],
            MassProfile::Exponential { m0, kappa } | MassProfile::Rational { m0, kappa } => {
                vec![m0, kappa]
            }
            MassProfile::Sech2 {
                m0,
                amplitude,
                kappa,
            } => vec![m0, amplitude, kappa],
            MassProfile::Tabulated(ref t) => {
                let (lo, hi) = t.range();
                if a < lo || b > hi {
                    return Err(Error::Domain(format!(
                        "domain [{a}, {b}] exceeds tabulated mass range [{lo}, {hi}]"
                    )));
                }
                vec![]
            }
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite mass parameters {params:?}"
            )));
        }
        for u in uniform_grid(a, b, 2001) {
            let [m, d1, d2] = self.eval(u);
            if !(m > 0.0) || !m.is_finite() || !d1.is_finite() || !d2.is_finite() {
                return Err(Error::Domain(format!(
                    "mass profile not positive and finite at u = {u}: m = {m}"
                )));
            }
        }
        Ok(())
    }

    /// Largest discrepancy between the analytic `m'`, `m''` and seven-point
    /// differences of `m` on `n` probe points of `[a, b]`, relative to the
    /// magnitude of the derivative.
    pub fn derivative_mismatch(&self, a: f64, b: f64, n: usize) -> Result<f64> {
        let u = uniform_grid(a, b, n);
        let m: Vec<f64> = u.iter().map(|&x| self.value(x)).collect();
        let d1 = DiffOperator::new(&u, 1, STENCIL_WIDTH)?.apply(&m);
        let d2 = DiffOperator::new(&u, 2, STENCIL_WIDTH)?.apply(&m);
        let mut worst = 0.0_f64;
        for (i, &x) in u.iter().enumerate() {
            let [mv, a1, a2] = self.eval(x);
            let scale = mv.abs().max(a1.abs()).max(a2.abs()).max(1e-300);
            worst = worst
                .max((d1[i] - a1).abs() / scale)
                .max((d2[i] - a2).abs() / scale);
        }
        Ok(worst)
    }
}

/// Tabulated mass samples with node derivatives from seven-point stencils.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableFields", into = "TableFields")]
pub struct TabulatedMass {
    u: Vec<f64>,
    m: Vec<f64>,
    dm: Vec<f64>,
    d2m: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFields {
    u: Vec<f64>,
    m: Vec<f64>,
}

impl TryFrom<TableFields> for TabulatedMass {
    type Error = Error;

    fn try_from(t: TableFields) -> Result<Self> {
        TabulatedMass::new(t.u, t.m)
    }
}

impl From<TabulatedMass> for TableFields {
    fn from(t: TabulatedMass) -> Self {
        TableFields { u: t.u, m: t.m }
    }
}

impl TabulatedMass {
    pub fn new(u: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if u.len() != m.len() {
            return Err(Error::InvalidGrid(format!(
                "{} abscissae but {} mass values",
                u.len(),
                m.len()
            )));
        }
        if u.len() < STENCIL_WIDTH {
            return Err(Error::GridTooSmall {
                needed: STENCIL_WIDTH,
                got: u.len(),
            });
        }
        check_increasing(&u)?;
        if let Some(v) = m.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("tabulated mass value {v} not positive")));
        }
        let dm = DiffOperator::new(&u, 1, STENCIL_WIDTH)?.apply(&m);
        let d2m = DiffOperator::new(&u, 2, STENCIL_WIDTH)?.apply(&m);
        Ok(Self { u, m, dm, d2m })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.u[0], self.u[self.u.len() - 1])
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.m)
    }

    fn eval(&self, x: f64) -> [f64; 3] {
        let n = self.u.len();
        let i = match self.u.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let h = self.u[i + 1] - self.u[i];
        let t = (x - self.u[i]) / h;
        let (f0, g0, k0) = (self.m[i], h * self.dm[i], h * h * self.d2m[i]);
        let (f1, g1, k1) = (self.m[i + 1], h * self.dm[i + 1], h * h * self.d2m[i + 1]);
        let c = [
            f0,
            g0,
            0.5 * k0,
            -10.0 * f0 - 6.0 * g0 - 1.5 * k0 + 10.0 * f1 - 4.0 * g1 + 0.5 * k1,
            15.0 * f0 + 8.0 * g0 + 1.5 * k0 - 15.0 * f1 + 7.0 * g1 - k1,
            -6.0 * f0 - 3.0 * g0 - 0.5 * k0 + 6.0 * f1 - 3.0 * g1 + 0.5 * k1,
        ];
        let p = c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck);
        let dp = (1..6)
            .rev()
            .fold(0.0, |acc, k| acc * t + k as f64 * c[k]);
        let d2p = (2..6)
            .rev()
            .fold(0.0, |acc, k| acc * t + (k * (k - 1)) as f64 * c[k]);
        [p, dp / h, d2p / (h * h)]
    }
}
