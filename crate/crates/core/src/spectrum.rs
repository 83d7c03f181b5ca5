//! Energy condition, level parameters and the squared-quartic cross-check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::ConfluentSpec;

/// Number of uniform brackets laid over the admissible energy range.
pub const SCAN_BRACKETS: usize = 10_000;
/// Extra brackets per finite end of the range, spaced geometrically so that
/// roots crowding towards a threshold are still separated.
pub const EDGE_BRACKETS: usize = 600;

/// One bound level with its level parameters `a > 0` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub n: u32,
    pub energy: f64,
    pub a: f64,
    pub b: f64,
}

/// Residuals of the relations tying a level to the potential parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateResiduals {
    /// `a² − (σ_β − λ2 E)`, relative.
    pub beta: f64,
    /// `2a(2n + b) − (λ1 E − σ_q0)`, relative to the size of its terms.
    pub linear: f64,
    /// `b(b − 2) − (σ_c − λ0 E)`, relative.
    pub c: f64,
    /// `q0 + (√β/4)(2n + 1 + √(1 + 4c))`.
    pub j0_relation: f64,
}

impl StateResiduals {
    pub fn max(&self) -> f64 {
        self.beta.max(self.linear).max(self.c).max(self.j0_relation)
    }
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0)
}

impl BoundState {
    pub fn beta(&self) -> f64 {
        self.a * self.a
    }

    pub fn c(&self) -> f64 {
        let h = self.b / 2.0;
        h * (h - 1.0)
    }

    pub fn q0(&self) -> f64 {
        -(self.a / 2.0) * (self.b / 2.0 + self.n as f64)
    }

    /// `n + (1 + √(1 + 4c))/2`; with `b ≥ 1` this equals `n + b/2`.
    pub fn j0(&self) -> f64 {
        self.n as f64 + 0.5 * (1.0 + (1.0 + 4.0 * self.c()).max(0.0).sqrt())
    }

    pub fn residuals(&self, spec: &ConfluentSpec) -> StateResiduals {
        let (e, n) = (self.energy, self.n as f64);
        let lhs = 2.0 * self.a * (2.0 * n + self.b);
        let rhs = spec.lambda1() * e - spec.sigma_q0();
        let scale = lhs
            .abs()
            .max((spec.lambda1() * e).abs())
            .max(spec.sigma_q0().abs())
            .max(1.0);
        let s = (1.0 + 4.0 * self.c()).max(0.0).sqrt();
        StateResiduals {
            beta: rel(self.beta(), spec.sigma_beta() - spec.lambda2() * e),
            linear: (lhs - rhs).abs() / scale,
            c: rel(self.b * (self.b - 2.0), spec.sigma_c() - spec.lambda0() * e),
            j0_relation: (self.q0() + self.beta().sqrt() / 4.0 * (2.0 * n + 1.0 + s)).abs(),
        }
    }
}

/// Outcome of the root search for one quantum number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Level {
    Bound(BoundState),
    NoRoot { n: u32 },
}

impl Level {
    pub fn n(&self) -> u32 {
        match self {
            Level::Bound(s) => s.n,
            Level::NoRoot { n } => *n,
        }
    }

    pub fn bound(&self) -> Option<&BoundState> {
        match self {
            Level::Bound(s) => Some(s),
            Level::NoRoot { .. } => None,
        }
    }
}

/// `F(E) = (λ1 E − σ_q0) / (2√(σ_β − λ2 E)) − √(1 + σ_c − λ0 E) − (2n + 1)`.
pub fn energy_condition(spec: &ConfluentSpec, n: u32, e: f64) -> Result<f64> {
    let a2 = spec.sigma_beta() - spec.lambda2() * e;
    let s = 1.0 + spec.sigma_c() - spec.lambda0() * e;
    if !(a2 > 0.0) || !(s >= 0.0) {
        return Err(Error::Domain(format!(
            "E = {e} outside the admissible range (σ_β − λ2E = {a2}, 1 + σ_c − λ0E = {s})"
        )));
    }
    Ok((spec.lambda1() * e - spec.sigma_q0()) / (2.0 * a2.sqrt()) - s.sqrt() - (2 * n + 1) as f64)
}

/// Energies where both radicands of the energy condition are admissible.
///
/// `lo`/`hi` may be infinite; an end set by `σ_β − λ2 E > 0` is open, an
/// end set by `1 + σ_c − λ0 E ≥ 0` is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyInterval {
    pub lo: f64,
    pub hi: f64,
}

pub fn valid_interval(spec: &ConfluentSpec) -> Option<EnergyInterval> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let (l2, sb) = (spec.lambda2(), spec.sigma_beta());
    if l2 > 0.0 {
        hi = hi.min(sb / l2);
    } else if l2 < 0.0 {
        lo = lo.max(sb / l2);
    } else if sb <= 0.0 {
        return None;
    }
    let (l0, sc) = (spec.lambda0(), 1.0 + spec.sigma_c());
    if l0 > 0.0 {
        hi = hi.min(sc / l0);
    } else if l0 < 0.0 {
        lo = lo.max(sc / l0);
    } else if sc < 0.0 {
        return None;
    }
    (lo < hi).then_some(EnergyInterval { lo, hi })
}

/// Scan abscissae covering the interval, increasing.
fn scan_points(iv: EnergyInterval, scale: f64) -> Vec<f64> {
    let n = SCAN_BRACKETS;
    let mut pts = Vec::with_capacity(n + 1 + 2 * EDGE_BRACKETS);
    let (lo, hi) = (iv.lo, iv.hi);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => pts.extend((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64)),
        (true, false) => pts.extend((0..n).map(|i| {
            let t = i as f64 / n as f64;
            lo + scale * t / (1.0 - t)
        })),
        (false, true) => pts.extend((0..n).map(|i| {
            let t = i as f64 / n as f64;
            hi - scale * t / (1.0 - t)
        })),
        (false, false) => pts.extend((1..n).map(|i| {
            let t = i as f64 / n as f64;
            scale * (std::f64::consts::PI * (t - 0.5)).tan()
        })),
    }
    let width = if lo.is_finite() && hi.is_finite() {
        hi - lo
    } else {
        scale
    };
    for k in 0..EDGE_BRACKETS {
        // Offsets from 1e-14 up to the full width.
        let d = width * 10f64.powf(-14.0 + 14.0 * k as f64 / (EDGE_BRACKETS - 1) as f64);
        if lo.is_finite() {
            pts.push(lo + d);
        }
        if hi.is_finite() {
            pts.push(hi - d);
        }
    }
    pts.retain(|e| e.is_finite() && *e >= lo && *e <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn bisect(spec: &ConfluentSpec, n: u32, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if (b - a) <= 1e-13 * mid.abs().max(1.0) || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = energy_condition(spec, n, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Level parameters for a root `E` of the energy condition.
pub fn level_parameters(spec: &ConfluentSpec, n: u32, e: f64) -> Option<BoundState> {
    let a2 = spec.sigma_beta() - spec.lambda2() * e;
    let s = 1.0 + spec.sigma_c() - spec.lambda0() * e;
    if !(a2 > 0.0 && s >= 0.0) {
        return None;
    }
    Some(BoundState {
        n,
        energy: e,
        a: a2.sqrt(),
        b: 1.0 + s.sqrt(),
    })
}

/// Tolerance on the relative residual of `2a(2n + b) = λ1 E − σ_q0`.
pub const LINEAR_RESIDUAL_TOL: f64 = 1e-8;

/// Admissible roots of the energy condition for quantum number `n`.
pub fn roots_for(spec: &ConfluentSpec, n: u32) -> Result<Vec<BoundState>> {
    let Some(iv) = valid_interval(spec) else {
        return Ok(Vec::new());
    };
    let pts = scan_points(iv, spec.magnitude());
    let mut prev: Option<(f64, f64)> = None;
    let mut out = Vec::new();
    for &e in &pts {
        let Ok(f) = energy_condition(spec, n, e) else {
            prev = None;
            continue;
        };
        if f == 0.0 {
            out.push(e);
        } else if let Some((ep, fp)) = prev {
            if fp != 0.0 && (fp < 0.0) != (f < 0.0) {
                out.push(bisect(spec, n, ep, e, fp)?);
            }
        }
        prev = Some((e, f));
    }
    Ok(out
        .into_iter()
        .filter_map(|e| level_parameters(spec, n, e))
        .filter(|s| s.a > 0.0 && s.b > 0.0 && s.residuals(spec).linear <= LINEAR_RESIDUAL_TOL)
        .collect())
}

/// Levels `n = 0..=n_max`; among several admissible roots for one `n` the
/// lowest energy is kept.
pub fn solve_levels(spec: &ConfluentSpec, n_max: u32) -> Result<Vec<Level>> {
    if valid_interval(spec).is_none() {
        return Ok(Vec::new());
    }
    (0..=n_max)
        .map(|n| {
            let roots = roots_for(spec, n)?;
            Ok(roots
                .into_iter()
                .min_by(|a, b| a.energy.total_cmp(&b.energy))
                .map_or(Level::NoRoot { n }, Level::Bound))
        })
        .collect()
}

/// Real polynomial in `E`, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn add(&self, o: &Poly, k: f64) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly(
            (0..n)
                .map(|i| self.0.get(i).copied().unwrap_or(0.0) + k * o.0.get(i).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    fn scale(&self, k: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * k).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative_at(&self, x: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
    }

    /// Degree after dropping leading coefficients that vanish relative to
    /// the largest one.
    pub fn trimmed(&self) -> Poly {
        let big = self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let mut c = self.0.clone();
        while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 1e-14 * big) {
            c.pop();
        }
        Poly(c)
    }
}

/// `(P² − 4A(K² + S))² − 64 A² K² S` with `P = λ1E − σ_q0`, `A = σ_β − λ2E`,
/// `S = 1 + σ_c − λ0E`, `K = 2n + 1`; every root of the energy condition is a
/// root of this quartic.
pub fn quartic_coefficients(spec: &ConfluentSpec, n: u32) -> Poly {
    let p = Poly(vec![-spec.sigma_q0(), spec.lambda1()]);
    let a = Poly(vec![spec.sigma_beta(), -spec.lambda2()]);
    let s = Poly(vec![1.0 + spec.sigma_c(), -spec.lambda0()]);
    let k = (2 * n + 1) as f64;
    let inner = p.mul(&p).add(&a.mul(&s.add(&Poly(vec![k * k]), 1.0)), -4.0);
    inner
        .mul(&inner)
        .add(&a.mul(&a).mul(&s).scale(64.0 * k * k), -1.0)
}

/// A real root of the squared quartic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticRoot {
    pub energy: f64,
    /// Whether the root solves the unsquared energy condition rather than
    /// one of the sign-flipped branches introduced by squaring.
    pub genuine: bool,
    /// `|F(E)|`, infinite where the radicands are invalid.
    pub residual: f64,
}

/// Relative tolerance on the principal branch residual of a genuine root.
pub const GENUINE_TOL: f64 = 1e-4;

/// Squaring `P = 2√A (√S + k)` twice admits the other sign choices of `√A`
/// and `√S`. A root is genuine when the principal branch is the one it
/// satisfies: its residual is the smallest of the four and small against the
/// size of the terms. Unlike `|F(E)|`, this stays well conditioned when `A`
/// approaches zero.
fn is_genuine(spec: &ConfluentSpec, n: u32, e: f64) -> bool {
    let a = spec.sigma_beta() - spec.lambda2() * e;
    let s = 1.0 + spec.sigma_c() - spec.lambda0() * e;
    if !(a > 0.0) || !(s >= 0.0) {
        return false;
    }
    let p = spec.lambda1() * e - spec.sigma_q0();
    let (ra, rs, k) = (a.sqrt(), s.sqrt(), (2 * n + 1) as f64);
    let branch = |sa: f64, ss: f64| (p - 2.0 * sa * ra * (ss * rs + k)).abs();
    let principal = branch(1.0, 1.0);
    let others = branch(1.0, -1.0).min(branch(-1.0, 1.0)).min(branch(-1.0, -1.0));
    let scale = p.abs() + 2.0 * ra * (rs + k);
    principal <= others && principal <= GENUINE_TOL * scale.max(f64::MIN_POSITIVE)
}

/// All real roots of [`quartic_coefficients`], tagged genuine or spurious.
pub fn quartic_roots_all(spec: &ConfluentSpec, n: u32) -> Vec<QuarticRoot> {
    let poly = quartic_coefficients(spec, n).trimmed();
    let deg = poly.0.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = poly.0[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -poly.0[i] / lead;
    }
    let eig = comp.complex_eigenvalues();
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * z.norm().max(1.0))
        .map(|z| polish(&poly, z.re))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
        .into_iter()
        .map(|e| {
            let residual = energy_condition(spec, n, e).map_or(f64::INFINITY, f64::abs);
            QuarticRoot {
                energy: e,
                genuine: is_genuine(spec, n, e),
                residual,
            }
        })
        .collect()
}

fn polish(poly: &Poly, mut x: f64) -> f64 {
    for _ in 0..20 {
        let f = poly.eval(x);
        let d = poly.derivative_at(x);
        if d == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / d;
        let next = x - step;
        if !next.is_finite() || poly.eval(next).abs() > f.abs() {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> ConfluentSpec {
        ConfluentSpec::new([0.0, 4.0, 0.0], 4.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn oscillator_condition_vanishes_at_linear_spectrum() {
        assert_eq!(energy_condition(&oscillator(), 0, 2.0).unwrap(), 0.0);
        assert_eq!(energy_condition(&oscillator(), 1, 4.0).unwrap(), 0.0);
        // Away from the spectrum F(E) = E − 2 − 2n.
        assert!((energy_condition(&oscillator(), 2, 3.5).unwrap() + 2.5).abs() < 1e-14);
    }

    #[test]
    fn radicand_violation_is_a_domain_error() {
        let coul = ConfluentSpec::new([0.0, 0.0, 1.0], 0.0, -4.0, 8.0).unwrap();
        assert!(matches!(energy_condition(&coul, 0, 0.5), Err(Error::Domain(_))));
        let morse = ConfluentSpec::new([8.0, 0.0, 0.0], 4.0, -43.6, 7.0).unwrap();
        assert!(energy_condition(&morse, 0, 1.5).is_err());
    }

    #[test]
    fn oscillator_levels() {
        let levels = solve_levels(&oscillator(), 3).unwrap();
        for (n, l) in levels.iter().enumerate() {
            let s = l.bound().unwrap();
            assert!((s.energy - (2 * n + 2) as f64).abs() < 1e-11, "{s:?}");
            assert!((s.a - 2.0).abs() < 1e-12 && (s.b - 2.0).abs() < 1e-12);
            assert!(s.residuals(&oscillator()).max() < 1e-10);
        }
    }

    #[test]
    fn empty_interval_gives_empty_list() {
        // λ2 = 0 and σ_β ≤ 0: no admissible energy at all.
        let spec = ConfluentSpec::new([1.0, 1.0, 0.0], -1.0, 0.0, 0.0).unwrap();
        assert!(valid_interval(&spec).is_none());
        assert!(solve_levels(&spec, 4).unwrap().is_empty());
    }

    #[test]
    fn quartic_contains_oscillator_root() {
        let roots = quartic_roots_all(&oscillator(), 0);
        assert!(roots.iter().any(|r| r.genuine && (r.energy - 2.0).abs() < 1e-10), "{roots:?}");
        // F(E) = E − 2 − 2n is linear, so squaring introduces no other genuine root.
        assert_eq!(roots.iter().filter(|r| r.genuine).count(), 1);
    }

    #[test]
    fn poly_arithmetic() {
        let p = Poly(vec![1.0, 2.0]).mul(&Poly(vec![-1.0, 1.0]));
        assert_eq!(p.0, vec![-1.0, -1.0, 2.0]);
        assert_eq!(p.eval(2.0), 5.0);
        assert_eq!(p.derivative_at(2.0), 7.0);
        assert_eq!(Poly(vec![1.0, 2.0, 1e-20]).trimmed().0.len(), 2);
    }
}
