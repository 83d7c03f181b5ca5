//! Special functions and differential utilities.
//!
//! * [`kummer_1f1`] / [`KummerPoly`]: the terminating confluent
//!   hypergeometric series `₁F₁(−n; b; z)`.
//! * [`schwarzian`]: the Schwarzian derivative `{ξ, u}` from analytic
//!   derivatives or, failing that, from stencils on the sampled grid.
//! * [`derivatives`]: finite differences on (possibly nonuniform) grids with
//!   per-point Fornberg weights.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Number of nodes in the default finite-difference stencil.
pub const STENCIL_WIDTH: usize = 7;

/// Relative threshold below which `ξ'` is treated as vanishing.
pub const SINGULAR_DERIVATIVE_TOL: f64 = 1e-12;

/// The polynomial `₁F₁(−n; b; scale·x)`.
///
/// Coefficients are stored with the argument scale folded in, so evaluation
/// is a single Horner pass in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct KummerPoly {
    n: u32,
    b: f64,
    scale: f64,
    coefficients: Vec<f64>,
}

impl KummerPoly {
    pub fn new(n: u32, b: f64, scale: f64) -> Result<Self> {
        if !b.is_finite() || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite Kummer parameters b = {b}, scale = {scale}"
            )));
        }
        let mut coefficients = Vec::with_capacity(n as usize + 1);
        let mut term = 1.0;
        coefficients.push(term);
        for k in 0..n {
            let kf = f64::from(k);
            let denominator = b + kf;
            if denominator.abs() <= f64::EPSILON * b.abs().max(1.0) {
                return Err(Error::Domain(format!(
                    "Pochhammer symbol (b)_{} vanishes for b = {b}",
                    k + 1
                )));
            }
            term *= (kf - f64::from(n)) / (denominator * (kf + 1.0)) * scale;
            coefficients.push(term);
        }
        Ok(Self {
            n,
            b,
            scale,
            coefficients,
        })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Coefficients of `x^k`, `k = 0..=n`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc.mul_add(x, c))
    }
}

/// Terminating Kummer function `₁F₁(−n; b; z) = Σ_{k≤n} (−n)_k z^k / ((b)_k k!)`.
pub fn kummer_1f1(n: u32, b: f64, z: f64) -> Result<f64> {
    Ok(KummerPoly::new(n, b, 1.0)?.eval(z))
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Analytic first three derivatives attached to a [`GridFunction`].
#[derive(Clone)]
pub struct AnalyticDerivatives {
    pub d1: RealFn,
    pub d2: RealFn,
    pub d3: RealFn,
}

impl AnalyticDerivatives {
    pub fn new(
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            d3: Arc::new(d3),
        }
    }
}

impl fmt::Debug for AnalyticDerivatives {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AnalyticDerivatives { .. }")
    }
}

/// A real function sampled on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    u: Vec<f64>,
    f: Vec<f64>,
    analytic: Option<AnalyticDerivatives>,
}

impl GridFunction {
    pub fn new(u: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if u.len() != f.len() {
            return Err(Error::InvalidGrid(format!(
                "{} abscissae but {} values",
                u.len(),
                f.len()
            )));
        }
        if u.is_empty() {
            return Err(Error::GridTooSmall { needed: 1, got: 0 });
        }
        check_increasing(&u)?;
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite value {} at u = {}",
                f[i], u[i]
            )));
        }
        Ok(Self {
            u,
            f,
            analytic: None,
        })
    }

    pub fn from_fn(u: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = u.iter().map(|&x| f(x)).collect();
        Self::new(u, values)
    }

    pub fn with_analytic(mut self, analytic: AnalyticDerivatives) -> Self {
        self.analytic = Some(analytic);
        self
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn analytic(&self) -> Option<&AnalyticDerivatives> {
        self.analytic.as_ref()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.f
    }
}

pub(crate) fn check_increasing(u: &[f64]) -> Result<()> {
    if let Some(x) = u.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite abscissa {x}")));
    }
    if let Some(w) = u.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "abscissae not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Fornberg's recursion: weights `c[k][j]` for the `k`-th derivative at `z`
/// from samples at `x[j]`, for every `k ≤ max_order`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index of the first node of a `width`-point stencil centred on node `i`,
/// shifted inwards at the boundaries.
pub(crate) fn stencil_start(i: usize, len: usize, width: usize) -> usize {
    let half = width / 2;
    i.saturating_sub(half).min(len - width)
}

/// Per-node finite-difference operator of a fixed derivative order.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    order: usize,
    width: usize,
    starts: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl DiffOperator {
    pub fn new(u: &[f64], order: usize, width: usize) -> Result<Self> {
        if !(1..=3).contains(&order) && order != 0 {
            return Err(Error::InvalidParameter(format!(
                "derivative order {order} not supported"
            )));
        }
        if width < order + 1 {
            return Err(Error::InvalidParameter(format!(
                "stencil of {width} points cannot form derivative of order {order}"
            )));
        }
        if u.len() < width {
            return Err(Error::GridTooSmall {
                needed: width,
                got: u.len(),
            });
        }
        check_increasing(u)?;
        let mut starts = Vec::with_capacity(u.len());
        let mut weights = Vec::with_capacity(u.len());
        for (i, &x0) in u.iter().enumerate() {
            let start = stencil_start(i, u.len(), width);
            let w = fornberg_weights(x0, &u[start..start + width], order);
            starts.push(start);
            weights.push(w[order].clone());
        }
        Ok(Self {
            order,
            width,
            starts,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Applies the operator to samples `f` using a caller-supplied
    /// multiply-accumulate, so the same weights serve real and complex data.
    pub fn apply_with<T, F>(&self, f: &[T], zero: T, mut mac: F) -> Vec<T>
    where
        T: Copy,
        F: FnMut(T, f64, T) -> T,
    {
        assert_eq!(f.len(), self.starts.len(), "sample count mismatch");
        self.starts
            .iter()
            .zip(&self.weights)
            .map(|(&start, w)| {
                w.iter()
                    .zip(&f[start..start + self.width])
                    .fold(zero, |acc, (&wk, &fk)| mac(acc, wk, fk))
            })
            .collect()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.apply_with(f, 0.0, |acc, w, x| w.mul_add(x, acc))
    }
}

/// Finite-difference derivative of `f` of the requested order (1, 2 or 3).
///
/// Seven-point stencils, centred in the interior and shifted at the ends;
/// exact for polynomials up to degree six.
pub fn derivatives(f: &GridFunction, order: usize) -> Result<GridFunction> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be 1, 2 or 3, got {order}"
        )));
    }
    let op = DiffOperator::new(f.u(), order, STENCIL_WIDTH)?;
    GridFunction::new(f.u().to_vec(), op.apply(f.values()))
}

/// Finite-difference derivative at an arbitrary abscissa inside the grid.
pub fn derivative_at(f: &GridFunction, x: f64, order: usize) -> Result<f64> {
    let u = f.u();
    if u.len() < STENCIL_WIDTH {
        return Err(Error::GridTooSmall {
            needed: STENCIL_WIDTH,
            got: u.len(),
        });
    }
    if x < u[0] || x > u[u.len() - 1] {
        return Err(Error::Domain(format!(
            "abscissa {x} outside grid [{}, {}]",
            u[0],
            u[u.len() - 1]
        )));
    }
    let nearest = match u.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => i,
        Err(i) => {
            if i == 0 {
                0
            } else if i == u.len() || (x - u[i - 1]) <= (u[i] - x) {
                i - 1
            } else {
                i
            }
        }
    };
    let start = stencil_start(nearest, u.len(), STENCIL_WIDTH);
    let w = fornberg_weights(x, &u[start..start + STENCIL_WIDTH], order);
    Ok(w[order]
        .iter()
        .zip(&f.values()[start..start + STENCIL_WIDTH])
        .map(|(a, b)| a * b)
        .sum())
}

/// Schwarzian derivative `ξ'''/ξ' − (3/2)(ξ''/ξ')²` from its three inputs.
///
/// The expanded form equals `(ξ''/ξ')(ξ'''/ξ'' − (3/2)ξ''/ξ')` and has no
/// `0/0` at inflection points.
pub fn schwarzian_from_derivatives(d1: f64, d2: f64, d3: f64, u: f64) -> Result<f64> {
    let scale = 1.0_f64.max(d2.abs()).max(d3.abs());
    if !(d1.abs() > SINGULAR_DERIVATIVE_TOL * scale) {
        return Err(Error::Singular {
            u,
            reason: format!("ξ' = {d1} vanishes in the Schwarzian"),
        });
    }
    let ratio = d2 / d1;
    Ok(d3 / d1 - 1.5 * ratio * ratio)
}

/// Schwarzian derivative of `ξ` at `u`.
///
/// Uses the analytic derivatives when `ξ` carries them, otherwise
/// seven-point finite differences of the samples.
pub fn schwarzian(xi: &GridFunction, u: f64) -> Result<f64> {
    let (d1, d2, d3) = match xi.analytic() {
        Some(a) => ((a.d1)(u), (a.d2)(u), (a.d3)(u)),
        None => (
            derivative_at(xi, u, 1)?,
            derivative_at(xi, u, 2)?,
            derivative_at(xi, u, 3)?,
        ),
    };
    schwarzian_from_derivatives(d1, d2, d3, u)
}

/// Uniform grid of `n` points spanning `[a, b]` with exact endpoints.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + i as f64 * h })
                .collect()
        }
    }
}
