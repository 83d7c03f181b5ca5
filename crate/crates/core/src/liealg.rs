//! Weak numeric checks of the so(2,1) realization on smooth test functions.
//!
//! The generators are second-order differential operators in `u` built
//! from a mapping `ξ(u)`; the scaled family `T_k = P⁻¹ J_k P` uses a scale
//! function `P(u)`, the mass in the position-dependent setting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{MappingSolution, MassProfile};
use crate::specfun::{uniform_grid, DiffOperator};

pub type CVec = Vec<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default stencil width; the nested products in commutators need the
/// truncation error well below the round-off floor of the base stencil.
pub const ALGEBRA_STENCIL: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    J0,
    J1,
    J2,
    T0,
    T1,
    T2,
}

impl Generator {
    pub fn is_scaled(self) -> bool {
        matches!(self, Generator::T0 | Generator::T1 | Generator::T2)
    }

    /// Index `k` of `J_k` / `T_k`.
    pub fn index(self) -> usize {
        match self {
            Generator::J0 | Generator::T0 => 0,
            Generator::J1 | Generator::T1 => 1,
            Generator::J2 | Generator::T2 => 2,
        }
    }

    pub fn scaled(self) -> Generator {
        [Generator::T0, Generator::T1, Generator::T2][self.index()]
    }

    pub fn unscaled(self) -> Generator {
        [Generator::J0, Generator::J1, Generator::J2][self.index()]
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Samples of `ξ`, its derivatives and an optional scale `P` on a grid.
#[derive(Debug, Clone)]
pub struct OperatorRealization {
    u: Vec<f64>,
    xi: [Vec<f64>; 4],
    scale: Option<[Vec<f64>; 3]>,
    casimir: f64,
    /// A different Casimir value used by one generator only.
    perturbed: Option<(Generator, f64)>,
    d1: DiffOperator,
    d2: DiffOperator,
}

impl OperatorRealization {
    /// `xi(u)` returns `[ξ, ξ', ξ'', ξ''']`.
    pub fn from_fn(u: Vec<f64>, xi: impl Fn(f64) -> [f64; 4], casimir: f64) -> Result<Self> {
        let mut cols: [Vec<f64>; 4] = Default::default();
        for &x in &u {
            for (col, v) in cols.iter_mut().zip(xi(x)) {
                col.push(v);
            }
        }
        Self::from_samples(u, cols, casimir)
    }

    pub fn from_mapping(mapping: &MappingSolution, casimir: f64) -> Result<Self> {
        Self::from_samples(
            mapping.u().to_vec(),
            [
                mapping.xi().to_vec(),
                mapping.xi_d1().to_vec(),
                mapping.xi_d2().to_vec(),
                mapping.xi_d3().to_vec(),
            ],
            casimir,
        )
    }

    fn from_samples(u: Vec<f64>, xi: [Vec<f64>; 4], casimir: f64) -> Result<Self> {
        if !casimir.is_finite() {
            return Err(Error::InvalidParameter(format!("Casimir value {casimir}")));
        }
        for (&x, &d) in u.iter().zip(&xi[1]) {
            if !(d.abs() > 1e-12) {
                return Err(Error::Singular {
                    u: x,
                    reason: format!("ξ' = {d} vanishes"),
                });
            }
        }
        let d1 = DiffOperator::new(&u, 1, ALGEBRA_STENCIL)?;
        let d2 = DiffOperator::new(&u, 2, ALGEBRA_STENCIL)?;
        Ok(Self {
            u,
            xi,
            scale: None,
            casimir,
            perturbed: None,
            d1,
            d2,
        })
    }

    /// Attaches `P(u)`; `p(u)` returns `[P, P', P'']`.
    pub fn with_scale(mut self, p: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        let mut cols: [Vec<f64>; 3] = Default::default();
        for &x in &self.u {
            let v = p(x);
            if !(v[0] > 0.0) {
                return Err(Error::Singular {
                    u: x,
                    reason: format!("scale function {} is not positive", v[0]),
                });
            }
            for (col, val) in cols.iter_mut().zip(v) {
                col.push(val);
            }
        }
        self.scale = Some(cols);
        Ok(self)
    }

    /// Uses the mass profile as scale function.
    pub fn with_mass(self, mass: &MassProfile) -> Result<Self> {
        let m = mass.clone();
        self.with_scale(move |u| m.eval(u))
    }

    /// Negative control: `gen` alone sees Casimir value `c`.
    pub fn with_perturbed_casimir(mut self, gen: Generator, c: f64) -> Self {
        self.perturbed = Some((gen, c));
        self
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn casimir(&self) -> f64 {
        self.casimir
    }

    pub fn has_scale(&self) -> bool {
        self.scale.is_some()
    }

    fn casimir_for(&self, gen: Generator) -> f64 {
        match self.perturbed {
            Some((g, c)) if g == gen => c,
            _ => self.casimir,
        }
    }
}

/// Applies one generator to complex samples `f` on the realization grid.
pub fn apply_generator(op: &OperatorRealization, gen: Generator, f: &[Complex64]) -> Result<CVec> {
    if f.len() != op.u.len() {
        return Err(Error::GridMismatch);
    }
    let scale = if gen.is_scaled() {
        Some(op.scale.as_ref().ok_or_else(|| {
            Error::InvalidParameter(format!("{gen} needs a scale function"))
        })?)
    } else {
        None
    };
    let mac = |acc: Complex64, w: f64, x: Complex64| acc + x * w;
    let zero = Complex64::new(0.0, 0.0);
    let df = op.d1.apply_with(f, zero, mac);
    let c = op.casimir_for(gen);
    let [xi, x1, x2, x3] = &op.xi;
    let out = match gen.index() {
        k @ (0 | 1) => {
            let d2f = op.d2.apply_with(f, zero, mac);
            let sign = if k == 0 { 1.0 } else { -1.0 };
            (0..f.len())
                .map(|i| {
                    let (x, d1, d2, d3) = (xi[i], x1[i], x2[i], x3[i]);
                    let kin = -x / (d1 * d1);
                    let pot = -0.5 * d3 * x / (d1 * d1 * d1) + 0.75 * d2 * d2 * x / (d1 * d1 * d1 * d1)
                        + c / x
                        + sign * x / 4.0;
                    let mut v = d2f[i] * kin + f[i] * pot;
                    if let Some([p, p1, p2]) = scale {
                        v += (df[i] * (2.0 * p1[i] / p[i]) + f[i] * (p2[i] / p[i])) * kin;
                    }
                    v
                })
                .collect()
        }
        _ => (0..f.len())
            .map(|i| {
                let (x, d1, d2) = (xi[i], x1[i], x2[i]);
                let mut v = -I * (df[i] * (x / d1)) - I * (f[i] * (0.5 * d2 * x / (d1 * d1)));
                if let Some([p, p1, _]) = scale {
                    v += -I * (f[i] * (x / d1 * p1[i] / p[i]));
                }
                v
            })
            .collect(),
    };
    Ok(out)
}

/// Smooth, sharply peaked test functions on a grid.
#[derive(Debug, Clone)]
pub struct TestFunctionSet {
    u: Vec<f64>,
    functions: Vec<CVec>,
}

/// Minimum number of functions in a [`TestFunctionSet`].
pub const MIN_TEST_FUNCTIONS: usize = 5;

impl TestFunctionSet {
    /// `count` Gaussians times random quadratics with random complex phase,
    /// centred in the middle tenth of the grid, narrow enough that each
    /// function and its first two derivatives fall below 1e-12 of the peak
    /// at both ends.
    pub fn generate(u: &[f64], count: usize, seed: u64) -> Result<Self> {
        if count < MIN_TEST_FUNCTIONS {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_TEST_FUNCTIONS} test functions, got {count}"
            )));
        }
        if u.len() < ALGEBRA_STENCIL {
            return Err(Error::GridTooSmall {
                needed: ALGEBRA_STENCIL,
                got: u.len(),
            });
        }
        let (a, b) = (u[0], u[u.len() - 1]);
        let len = b - a;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut functions = Vec::with_capacity(count);
        for _ in 0..count {
            let centre = a + len * rng.gen_range(0.45..0.55);
            let width = len * rng.gen_range(0.045..0.05);
            let coeffs: [f64; 3] = [rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            functions.push(
                u.iter()
                    .map(|&x| {
                        let t = (x - centre) / width;
                        let poly = coeffs[0] + coeffs[1] * t + coeffs[2] * t * t;
                        phase * (poly * (-0.5 * t * t).exp())
                    })
                    .collect(),
            );
        }
        Ok(Self {
            u: u.to_vec(),
            functions,
        })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn functions(&self) -> &[CVec] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Largest end-point value of any function or of its first two
    /// derivatives, relative to that function's peak.
    pub fn max_tail(&self) -> Result<f64> {
        let d1 = DiffOperator::new(&self.u, 1, ALGEBRA_STENCIL)?;
        let d2 = DiffOperator::new(&self.u, 2, ALGEBRA_STENCIL)?;
        let zero = Complex64::new(0.0, 0.0);
        let mac = |acc: Complex64, w: f64, x: Complex64| acc + x * w;
        let mut worst = 0.0_f64;
        for f in &self.functions {
            let peak = sup(f, 0..f.len());
            for g in [f.clone(), d1.apply_with(f, zero, mac), d2.apply_with(f, zero, mac)] {
                let n = g.len();
                worst = worst.max(g[0].norm() / peak).max(g[n - 1].norm() / peak);
            }
        }
        Ok(worst)
    }
}

fn sup(f: &[Complex64], range: std::ops::Range<usize>) -> f64 {
    f[range].iter().fold(0.0_f64, |m, v| m.max(v.norm()))
}

/// Node range of the interior 60% of a grid.
pub fn interior(len: usize) -> std::ops::Range<usize> {
    let skip = len / 5;
    skip..len - skip
}

fn check_grid(op: &OperatorRealization, tests: &TestFunctionSet) -> Result<()> {
    if op.u != tests.u {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `max_f ‖(AB − BA − sign·i·C) f‖∞ / ‖f‖∞` on the interior 60% of the grid.
pub fn commutator_residual(
    a: Generator,
    b: Generator,
    c: Generator,
    sign: f64,
    op: &OperatorRealization,
    tests: &TestFunctionSet,
) -> Result<f64> {
    check_grid(op, tests)?;
    let range = interior(op.u.len());
    let mut worst = 0.0_f64;
    for f in tests.functions() {
        let bf = apply_generator(op, b, f)?;
        let af = apply_generator(op, a, f)?;
        let abf = apply_generator(op, a, &bf)?;
        let baf = apply_generator(op, b, &af)?;
        let cf = apply_generator(op, c, f)?;
        let diff: CVec = (0..f.len())
            .map(|i| abf[i] - baf[i] - I * sign * cf[i])
            .collect();
        worst = worst.max(sup(&diff, range.clone()) / sup(f, range.clone()));
    }
    Ok(worst)
}

/// One commutation relation `[A, B] = sign·i·C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub a: Generator,
    pub b: Generator,
    pub c: Generator,
    pub sign: i8,
}

impl Relation {
    /// `[J0, J1] = iJ2`, `[J2, J0] = iJ1`, `[J1, J2] = −iJ0`.
    pub const SO21: [Relation; 3] = [
        Relation { a: Generator::J0, b: Generator::J1, c: Generator::J2, sign: 1 },
        Relation { a: Generator::J2, b: Generator::J0, c: Generator::J1, sign: 1 },
        Relation { a: Generator::J1, b: Generator::J2, c: Generator::J0, sign: -1 },
    ];

    pub fn scaled(self) -> Relation {
        Relation {
            a: self.a.scaled(),
            b: self.b.scaled(),
            c: self.c.scaled(),
            sign: self.sign,
        }
    }

    pub fn label(&self) -> String {
        let s = if self.sign > 0 { "" } else { "-" };
        format!("[{},{}]={}i{}", self.a, self.b, s, self.c)
    }

    pub fn residual(&self, op: &OperatorRealization, tests: &TestFunctionSet) -> Result<f64> {
        commutator_residual(self.a, self.b, self.c, f64::from(self.sign), op, tests)
    }
}

/// `max_f ‖([d/dx, x] − 1) f‖∞ / ‖f‖∞` on the interior of the grid.
pub fn heisenberg_residual(tests: &TestFunctionSet) -> Result<f64> {
    let u = tests.u();
    let d = DiffOperator::new(u, 1, ALGEBRA_STENCIL)?;
    let zero = Complex64::new(0.0, 0.0);
    let mac = |acc: Complex64, w: f64, x: Complex64| acc + x * w;
    let range = interior(u.len());
    let mut worst = 0.0_f64;
    for f in tests.functions() {
        let xf: CVec = f.iter().zip(u).map(|(v, &x)| v * x).collect();
        let dxf = d.apply_with(&xf, zero, mac);
        let df = d.apply_with(f, zero, mac);
        let diff: CVec = (0..f.len()).map(|i| dxf[i] - df[i] * u[i] - f[i]).collect();
        worst = worst.max(sup(&diff, range.clone()) / sup(f, range.clone()));
    }
    Ok(worst)
}

/// Largest difference between `T_k` and `J_k` outputs over the tests, for
/// all three `k`.
pub fn scaled_vs_plain_residual(op: &OperatorRealization, tests: &TestFunctionSet) -> Result<f64> {
    check_grid(op, tests)?;
    let mut worst = 0.0_f64;
    for f in tests.functions() {
        for g in [Generator::J0, Generator::J1, Generator::J2] {
            let a = apply_generator(op, g, f)?;
            let b = apply_generator(op, g.scaled(), f)?;
            let d: CVec = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            worst = worst.max(sup(&d, 0..d.len()) / sup(f, 0..f.len()));
        }
    }
    Ok(worst)
}

/// A second-order operator `a D² + b D + c` with sampled coefficients.
#[derive(Debug, Clone)]
pub struct OperatorExpr {
    pub a: CVec,
    pub b: CVec,
    pub c: CVec,
}

impl OperatorExpr {
    fn zeros(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self { a: z.clone(), b: z.clone(), c: z }
    }

    fn axpy(&mut self, w: Complex64, other: &OperatorExpr) {
        for (dst, src) in [(&mut self.a, &other.a), (&mut self.b, &other.b), (&mut self.c, &other.c)] {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }

    pub fn apply(&self, op: &OperatorRealization, f: &[Complex64]) -> Result<CVec> {
        if f.len() != op.u.len() || self.a.len() != f.len() {
            return Err(Error::GridMismatch);
        }
        let zero = Complex64::new(0.0, 0.0);
        let mac = |acc: Complex64, w: f64, x: Complex64| acc + x * w;
        let df = op.d1.apply_with(f, zero, mac);
        let d2f = op.d2.apply_with(f, zero, mac);
        Ok((0..f.len())
            .map(|i| self.a[i] * d2f[i] + self.b[i] * df[i] + self.c[i] * f[i])
            .collect())
    }
}

/// Coefficients of one generator; see [`apply_generator`].
pub fn generator_expr(op: &OperatorRealization, gen: Generator) -> Result<OperatorExpr> {
    let n = op.u.len();
    let scale = if gen.is_scaled() {
        Some(op.scale.as_ref().ok_or_else(|| {
            Error::InvalidParameter(format!("{gen} needs a scale function"))
        })?)
    } else {
        None
    };
    let c0 = op.casimir_for(gen);
    let [xi, x1, x2, x3] = &op.xi;
    let mut e = OperatorExpr::zeros(n);
    for i in 0..n {
        let (x, d1, d2, d3) = (xi[i], x1[i], x2[i], x3[i]);
        match gen.index() {
            k @ (0 | 1) => {
                let sign = if k == 0 { 1.0 } else { -1.0 };
                let kin = -x / (d1 * d1);
                let pot = -0.5 * d3 * x / (d1 * d1 * d1) + 0.75 * d2 * d2 * x / (d1 * d1 * d1 * d1)
                    + c0 / x
                    + sign * x / 4.0;
                e.a[i] = kin.into();
                e.c[i] = pot.into();
                if let Some([p, p1, p2]) = scale {
                    e.b[i] = (kin * 2.0 * p1[i] / p[i]).into();
                    e.c[i] += kin * p2[i] / p[i];
                }
            }
            _ => {
                e.b[i] = -I * (x / d1);
                e.c[i] = -I * (0.5 * d2 * x / (d1 * d1));
                if let Some([p, p1, _]) = scale {
                    e.c[i] += -I * (x / d1 * p1[i] / p[i]);
                }
            }
        }
    }
    Ok(e)
}

/// Derivatives of smooth coefficient functions through a least-squares
/// Chebyshev fit of fixed degree. Differentiating grid noise with a local
/// stencil compounds at every nesting level; the fit discards it.
struct SpectralDiff {
    pinv: DMatrix<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
}

/// Upper bound on the degree of [`SpectralDiff`].
const SPECTRAL_DEGREE: usize = 32;

impl SpectralDiff {
    fn new(u: &[f64]) -> Result<Self> {
        let n = u.len();
        let deg = SPECTRAL_DEGREE.min((n - 1) / 4);
        let (a, b) = (u[0], u[n - 1]);
        let half = 0.5 * (b - a);
        let mut v = DMatrix::zeros(n, deg + 1);
        for (i, &x) in u.iter().enumerate() {
            let t = (x - a) / half - 1.0;
            let (mut prev, mut cur) = (1.0, t);
            v[(i, 0)] = 1.0;
            for j in 1..=deg {
                v[(i, j)] = cur;
                let next = 2.0 * t * cur - prev;
                prev = cur;
                cur = next;
            }
        }
        // Coefficient-space derivative of a Chebyshev series on [a, b].
        let mut dc = DMatrix::zeros(deg + 1, deg + 1);
        for j in 1..=deg {
            let mut k = j as isize - 1;
            while k >= 0 {
                let w = if k == 0 { 1.0 } else { 2.0 };
                dc[(k as usize, j)] = w * j as f64 / half;
                k -= 2;
            }
        }
        let pinv = v
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let d1 = &v * &dc;
        let d2 = &d1 * &dc;
        Ok(Self { pinv, d1, d2 })
    }

    fn apply(&self, eval: &DMatrix<f64>, f: &[Complex64]) -> CVec {
        let re = DVector::from_iterator(f.len(), f.iter().map(|z| z.re));
        let im = DVector::from_iterator(f.len(), f.iter().map(|z| z.im));
        let re = eval * (&self.pinv * re);
        let im = eval * (&self.pinv * im);
        re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }
}

/// `[p D + q, X]` for a second-order `X`; the third-order parts cancel so
/// the result is again second order.
fn bracket_first_order(sd: &SpectralDiff, first: &OperatorExpr, x: &OperatorExpr) -> OperatorExpr {
    let d = |v: &CVec| sd.apply(&sd.d1, v);
    let dd = |v: &CVec| sd.apply(&sd.d2, v);
    let (p, q) = (&first.b, &first.c);
    let (p1, p2, q1, q2) = (d(p), dd(p), d(q), dd(q));
    let (a1, b1, c1) = (d(&x.a), d(&x.b), d(&x.c));
    let n = p.len();
    let mut out = OperatorExpr::zeros(n);
    for i in 0..n {
        out.a[i] = p[i] * a1[i] - 2.0 * x.a[i] * p1[i];
        out.b[i] = p[i] * b1[i] - x.a[i] * p2[i] - 2.0 * x.a[i] * q1[i] - x.b[i] * p1[i];
        out.c[i] = p[i] * c1[i] - x.a[i] * q2[i] - x.b[i] * q1[i];
    }
    out
}

/// Maximal order accepted by [`scale_identity_residual`].
pub const MAX_SCALE_ORDER: usize = 6;

/// Partial sum `Σ_{k≤order} ad^k(T0)/k!` with `ad(X) = [iθ T2, X]`.
pub fn scale_series(op: &OperatorRealization, theta: f64, order: usize) -> Result<OperatorExpr> {
    if order > MAX_SCALE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "series order {order} exceeds {MAX_SCALE_ORDER}"
        )));
    }
    let t2 = generator_expr(op, Generator::T2)?;
    let mut term = generator_expr(op, Generator::T0)?;
    let mut sum = term.clone();
    let sd = SpectralDiff::new(&op.u)?;
    for k in 1..=order {
        let next = bracket_first_order(&sd, &t2, &term);
        term = OperatorExpr::zeros(next.a.len());
        term.axpy(I * theta / k as f64, &next);
        sum.axpy(Complex64::new(1.0, 0.0), &term);
    }
    Ok(sum)
}

/// Residual of `e^{iθT2} T0 e^{−iθT2} = T0 cosh θ − T1 sinh θ` with the left
/// side summed as a nested-commutator series up to `order`. The nested
/// brackets are formed on operator coefficients and applied to each test
/// function once; the right side uses the exact hyperbolic functions, so
/// the residual is the series truncation plus discretization error,
/// relative to `‖f‖∞` on the interior.
pub fn scale_identity_residual(
    op: &OperatorRealization,
    theta: f64,
    order: usize,
    tests: &TestFunctionSet,
) -> Result<f64> {
    check_grid(op, tests)?;
    let mut diff = scale_series(op, theta, order)?;
    let t0 = generator_expr(op, Generator::T0)?;
    diff.axpy(Complex64::new(-theta.cosh(), 0.0), &t0);
    diff.axpy(Complex64::new(theta.sinh(), 0.0), &generator_expr(op, Generator::T1)?);
    let range = interior(op.u.len());
    let mut worst = 0.0_f64;
    for f in tests.functions() {
        let r = diff.apply(op, f)?;
        worst = worst.max(sup(&r, range.clone()) / sup(f, range.clone()));
    }
    Ok(worst)
}

/// `θ = (β − 1)/(β + 1)`.
pub fn theta_of_beta(beta: f64) -> f64 {
    (beta - 1.0) / (beta + 1.0)
}

/// `δ = ln(β)/2`.
pub fn delta_of_beta(beta: f64) -> f64 {
    0.5 * beta.ln()
}

/// Standard mappings used by the algebra suite: `ξ = u`, `u²`, `e^u`, each
/// on a grid where `ξ` and `ξ'` stay away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardMapping {
    Identity,
    Square,
    Exponential,
}

impl StandardMapping {
    pub const ALL: [StandardMapping; 3] = [
        StandardMapping::Identity,
        StandardMapping::Square,
        StandardMapping::Exponential,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StandardMapping::Identity => "xi=u",
            StandardMapping::Square => "xi=u^2",
            StandardMapping::Exponential => "xi=exp(u)",
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            StandardMapping::Identity => (1.0, 7.0),
            StandardMapping::Square => (0.5, 4.5),
            StandardMapping::Exponential => (-2.0, 2.0),
        }
    }

    pub fn eval(self, u: f64) -> [f64; 4] {
        match self {
            StandardMapping::Identity => [u, 1.0, 0.0, 0.0],
            StandardMapping::Square => [u * u, 2.0 * u, 2.0, 0.0],
            StandardMapping::Exponential => {
                let e = u.exp();
                [e, e, e, e]
            }
        }
    }

    pub fn realization(self, points: usize, casimir: f64) -> Result<OperatorRealization> {
        let (a, b) = self.domain();
        OperatorRealization::from_fn(uniform_grid(a, b, points), move |u| self.eval(u), casimir)
    }
}

/// Grid size used by the standard algebra suite.
pub const ALGEBRA_POINTS: usize = 601;
