//! Potential parameters, mass profiles and the coordinate mapping `ξ(u)`.
//!
//! The mapping solves `ξ'² = 8 m(u) ξ² / R(ξ)` on a uniform output grid.
//! Higher derivatives come from differentiating the right-hand side, never
//! from differencing the samples.

mod mass;
mod ode;
mod spec;

use serde::{Deserialize, Serialize};

pub use mass::{MassProfile, TabulatedMass};
pub use spec::ConfluentSpec;

use crate::error::{Error, Result};
use crate::specfun::{uniform_grid, STENCIL_WIDTH};
use ode::{Advance, Stepper};

/// Admissible range of `ξ`.
pub const XI_RANGE: (f64, f64) = (1e-14, 1e150);
/// Admissible range of `4ξ²/R(ξ)`; the domain is clipped where it leaves it.
pub const RATIO_RANGE: (f64, f64) = (1e-14, 1e14);

/// Sign of `ξ'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl TryFrom<i8> for Branch {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Branch::Plus),
            -1 => Ok(Branch::Minus),
            other => Err(format!("branch must be +1 or -1, got {other}")),
        }
    }
}

impl From<Branch> for i8 {
    fn from(b: Branch) -> i8 {
        match b {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

/// Domain, output grid and initial condition for [`solve_mapping`].
#[derive(Debug, Clone, PartialEq)]
pub struct MappingRequest {
    pub domain: (f64, f64),
    pub resolution: usize,
    /// Defaults to the domain midpoint.
    pub u0: Option<f64>,
    pub xi0: f64,
    pub branch: Branch,
    pub rtol: f64,
    pub atol: f64,
}

impl MappingRequest {
    pub fn new(domain: (f64, f64), resolution: usize) -> Self {
        Self {
            domain,
            resolution,
            u0: None,
            xi0: 1.0,
            branch: Branch::Plus,
            rtol: 1e-10,
            atol: 1e-12,
        }
    }

    pub fn with_initial(mut self, u0: f64, xi0: f64) -> Self {
        self.u0 = Some(u0);
        self.xi0 = xi0;
        self
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_domain(mut self, domain: (f64, f64)) -> Self {
        self.domain = domain;
        self
    }

    pub fn u0(&self) -> f64 {
        self.u0
            .unwrap_or(0.5 * (self.domain.0 + self.domain.1))
    }

    fn validate(&self, spec: &ConfluentSpec) -> Result<Vec<f64>> {
        let (a, b) = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("invalid domain [{a}, {b}]")));
        }
        if self.resolution < STENCIL_WIDTH {
            return Err(Error::GridTooSmall {
                needed: STENCIL_WIDTH,
                got: self.resolution,
            });
        }
        let u0 = self.u0();
        if !(a..=b).contains(&u0) {
            return Err(Error::Domain(format!("u0 = {u0} outside [{a}, {b}]")));
        }
        if !(self.xi0 > 0.0 && self.xi0.is_finite()) {
            return Err(Error::Domain(format!("ξ0 = {} must be positive", self.xi0)));
        }
        let r0 = spec.r(self.xi0);
        if r0 <= 0.0 {
            return Err(Error::Singular {
                u: u0,
                reason: format!("R(ξ0) = {r0} is not positive"),
            });
        }
        if !admissible_xi(spec, self.xi0) {
            return Err(Error::Singular {
                u: u0,
                reason: format!("4ξ²/R at ξ0 = {} is outside the admissible range", self.xi0),
            });
        }
        Ok(uniform_grid(a, b, self.resolution))
    }
}

fn admissible_xi(spec: &ConfluentSpec, xi: f64) -> bool {
    let r = spec.r(xi);
    if !(xi >= XI_RANGE.0 && xi <= XI_RANGE.1 && r > 0.0) {
        return false;
    }
    let ratio = 4.0 * xi * xi / r;
    ratio >= RATIO_RANGE.0 && ratio <= RATIO_RANGE.1
}

/// `[ξ', ξ'', ξ''']` at `(u, ξ)` from the ODE right-hand side and its
/// analytic derivatives.
pub fn mapping_derivatives(
    spec: &ConfluentSpec,
    mass: &MassProfile,
    branch: Branch,
    u: f64,
    xi: f64,
) -> [f64; 3] {
    let c = branch.sign() * 8f64.sqrt();
    let [m, m1, m2] = mass.eval(u);
    let g = m.sqrt();
    let g1 = m1 / (2.0 * g);
    let g2 = m2 / (2.0 * g) - m1 * m1 / (4.0 * m * g);
    let r = spec.r(xi);
    let rd = spec.r_dot(xi);
    let rdd = spec.r_ddot();
    let ir = 1.0 / r.sqrt();
    let k = xi * ir;
    let kd = ir - 0.5 * xi * rd * ir.powi(3);
    let kdd = -rd * ir.powi(3) - 0.5 * xi * rdd * ir.powi(3) + 0.75 * xi * rd * rd * ir.powi(5);
    let d1 = c * g * k;
    let d2 = c * g1 * k + c * c * g * g * k * kd;
    let d3 = c * g2 * k
        + 3.0 * c * c * g * g1 * k * kd
        + c * c * c * g * g * g * (k * k * kdd + k * kd * kd);
    [d1, d2, d3]
}

/// Sampled mapping `ξ(u)` with its first three derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingSolution {
    u: Vec<f64>,
    xi: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
    branch: Branch,
    initial: (f64, f64),
    requested: (f64, f64),
    clipped: (bool, bool),
    closed_form: bool,
}

impl MappingSolution {
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn xi_d1(&self) -> &[f64] {
        &self.d1
    }

    pub fn xi_d2(&self) -> &[f64] {
        &self.d2
    }

    pub fn xi_d3(&self) -> &[f64] {
        &self.d3
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Retained physical domain.
    pub fn domain(&self) -> (f64, f64) {
        (self.u[0], self.u[self.u.len() - 1])
    }

    pub fn requested_domain(&self) -> (f64, f64) {
        self.requested
    }

    /// Whether the lower and upper ends were clipped at a singular point.
    pub fn clipped(&self) -> (bool, bool) {
        self.clipped
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `(u0, ξ0)`.
    pub fn initial(&self) -> (f64, f64) {
        self.initial
    }

    pub fn is_closed_form(&self) -> bool {
        self.closed_form
    }

    /// Pointwise relative residual `|ξ'²/(2m) − 4ξ²/R| / max(1, 4ξ²/R)`.
    pub fn residuals(&self, spec: &ConfluentSpec, mass: &MassProfile) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.xi)
            .zip(&self.d1)
            .map(|((&u, &xi), &d1)| {
                let target = 4.0 * xi * xi / spec.r(xi);
                (d1 * d1 / (2.0 * mass.value(u)) - target).abs() / target.max(1.0)
            })
            .collect()
    }

    pub fn max_residual(&self, spec: &ConfluentSpec, mass: &MassProfile) -> f64 {
        self.residuals(spec, mass).into_iter().fold(0.0, f64::max)
    }

    /// `ξ(u)` between nodes by cubic Hermite interpolation on `ξ, ξ'`.
    pub fn xi_at(&self, u: f64) -> Result<f64> {
        let (a, b) = self.domain();
        if !(a..=b).contains(&u) {
            return Err(Error::Domain(format!("u = {u} outside [{a}, {b}]")));
        }
        let i = self.u.partition_point(|&x| x <= u).clamp(1, self.u.len() - 1) - 1;
        let h = self.u[i + 1] - self.u[i];
        let t = (u - self.u[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.xi[i]
            + (t3 - 2.0 * t2 + t) * h * self.d1[i]
            + (-2.0 * t3 + 3.0 * t2) * self.xi[i + 1]
            + (t3 - t2) * h * self.d1[i + 1])
    }
}

fn finish(
    grid: &[f64],
    lo: usize,
    hi: usize,
    xi: Vec<f64>,
    spec: &ConfluentSpec,
    mass: &MassProfile,
    req: &MappingRequest,
    closed_form: Option<[Vec<f64>; 3]>,
) -> Result<MappingSolution> {
    let kept = hi + 1 - lo;
    let requested = req.domain;
    let span = if kept > 0 { grid[hi] - grid[lo] } else { 0.0 };
    if kept < STENCIL_WIDTH || span < 0.01 * (requested.1 - requested.0) {
        return Err(Error::DegenerateDomain(format!(
            "only {kept} nodes spanning {span:.3e} remain of [{}, {}]",
            requested.0, requested.1
        )));
    }
    let u = grid[lo..=hi].to_vec();
    let is_closed_form = closed_form.is_some();
    let (d1, d2, d3) = match closed_form {
        Some([d1, d2, d3]) => (d1, d2, d3),
        None => {
            let mut d = (Vec::with_capacity(kept), Vec::with_capacity(kept), Vec::with_capacity(kept));
            for (&ui, &x) in u.iter().zip(&xi) {
                let [a, b, c] = mapping_derivatives(spec, mass, req.branch, ui, x);
                d.0.push(a);
                d.1.push(b);
                d.2.push(c);
            }
            d
        }
    };
    Ok(MappingSolution {
        u,
        xi,
        d1,
        d2,
        d3,
        branch: req.branch,
        initial: (req.u0(), req.xi0),
        requested,
        clipped: (lo > 0, hi + 1 < grid.len()),
        closed_form: is_closed_form,
    })
}

/// Integrates the mapping ODE from `(u0, ξ0)` towards both ends of the domain.
///
/// The state is `ln ξ`, which keeps the relative accuracy of `ξ` uniform over
/// many decades. Integration stops before `ξ`, `R(ξ)` or `m(u)` leave their
/// admissible ranges; the reported domain then shrinks accordingly.
pub fn solve_mapping(
    spec: &ConfluentSpec,
    mass: &MassProfile,
    req: &MappingRequest,
) -> Result<MappingSolution> {
    let grid = req.validate(spec)?;
    let u0 = req.u0();
    let y0 = req.xi0.ln();
    let s = req.branch.sign() * 8f64.sqrt();
    let rhs = |u: f64, y: f64| {
        let xi = y.exp();
        let r = spec.r(xi);
        let m = mass.value(u);
        if r > 0.0 && m > 0.0 && xi.is_finite() {
            Some(s * (m / r).sqrt())
        } else {
            None
        }
    };
    let admissible = |u: f64, y: f64| mass.value(u) > 0.0 && admissible_xi(spec, y.exp());
    if mass.value(u0) <= 0.0 {
        return Err(Error::Singular {
            u: u0,
            reason: "mass is not positive at u0".to_string(),
        });
    }

    // An error δ in ln ξ is a relative error δ in ξ, so the relative
    // tolerance becomes an absolute one on the log state.
    let log_tol = req.atol + req.rtol;
    let first_up = grid.partition_point(|&x| x < u0);
    let mut logs = vec![f64::NAN; grid.len()];

    let mut hi = first_up;
    let mut stepper = Stepper::new(rhs, admissible, 0.0, log_tol);
    let (mut u, mut y) = (u0, y0);
    while hi < grid.len() {
        match stepper.advance(u, y, grid[hi]) {
            Advance::Reached(yn) => {
                logs[hi] = yn;
                u = grid[hi];
                y = yn;
                hi += 1;
            }
            Advance::Stopped { .. } => break,
        }
    }

    let mut lo = first_up;
    let mut stepper = Stepper::new(rhs, admissible, 0.0, log_tol);
    let (mut u, mut y) = (u0, y0);
    while lo > 0 {
        match stepper.advance(u, y, grid[lo - 1]) {
            Advance::Reached(yn) => {
                logs[lo - 1] = yn;
                u = grid[lo - 1];
                y = yn;
                lo -= 1;
            }
            Advance::Stopped { .. } => break,
        }
    }

    if hi == lo {
        return Err(Error::DegenerateDomain(format!(
            "integration from u0 = {u0} reached no grid node"
        )));
    }
    let xi: Vec<f64> = logs[lo..hi].iter().map(|y| y.exp()).collect();
    finish(&grid, lo, hi - 1, xi, spec, mass, req, None)
}

/// Analytic mapping for a single nonzero `λ` and constant mass.
///
/// Returns `Ok(None)` when no closed form is available; the samples are
/// clipped by the same rules as [`solve_mapping`].
pub fn closed_form_mapping(
    spec: &ConfluentSpec,
    mass: &MassProfile,
    req: &MappingRequest,
) -> Result<Option<MappingSolution>> {
    let Some((which, lambda)) = spec.single_lambda() else {
        return Ok(None);
    };
    if !mass.is_constant() || lambda <= 0.0 {
        return Ok(None);
    }
    let m0 = mass.value(0.0);
    if m0 <= 0.0 {
        return Ok(None);
    }
    let grid = req.validate(spec)?;
    let (u0, xi0) = (req.u0(), req.xi0);
    let s = req.branch.sign();
    let eval = |u: f64| -> Option<[f64; 4]> {
        let du = u - u0;
        let out = match which {
            0 => {
                let k = s * (8.0 * m0 / lambda).sqrt();
                let x = xi0 * (k * du).exp();
                [x, k * x, k * k * x, k * k * k * x]
            }
            1 => {
                let k = s * (2.0 * m0 / lambda).sqrt();
                let r = xi0.sqrt() + k * du;
                if r <= 0.0 {
                    return None;
                }
                [r * r, 2.0 * k * r, 2.0 * k * k, 0.0]
            }
            _ => {
                let k = s * (8.0 * m0 / lambda).sqrt();
                [xi0 + k * du, k, 0.0, 0.0]
            }
        };
        (out.iter().all(|v| v.is_finite()) && admissible_xi(spec, out[0])).then_some(out)
    };
    let samples: Vec<Option<[f64; 4]>> = grid.iter().map(|&u| eval(u)).collect();
    let start = grid.partition_point(|&x| x < u0);
    // Extend the admissible run that touches u0 in both directions.
    let mut hi = start;
    while hi < grid.len() && samples[hi].is_some() {
        hi += 1;
    }
    let mut lo = start;
    while lo > 0 && samples[lo - 1].is_some() {
        lo -= 1;
    }
    if hi == lo {
        return Err(Error::DegenerateDomain(format!(
            "no admissible node next to u0 = {u0}"
        )));
    }
    let vals: Vec<[f64; 4]> = samples[lo..hi].iter().map(|s| s.unwrap()).collect();
    let xi = vals.iter().map(|v| v[0]).collect();
    let derivs = [
        vals.iter().map(|v| v[1]).collect(),
        vals.iter().map(|v| v[2]).collect(),
        vals.iter().map(|v| v[3]).collect(),
    ];
    finish(&grid, lo, hi - 1, xi, spec, mass, req, Some(derivs)).map(Some)
}

/// Closed form when available, otherwise the ODE solution.
pub fn best_mapping(
    spec: &ConfluentSpec,
    mass: &MassProfile,
    req: &MappingRequest,
) -> Result<MappingSolution> {
    match closed_form_mapping(spec, mass, req)? {
        Some(sol) => Ok(sol),
        None => solve_mapping(spec, mass, req),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> ConfluentSpec {
        ConfluentSpec::new([0.0, 4.0, 0.0], 4.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn oscillator_mapping_is_half_square() {
        let req = MappingRequest::new((0.5, 6.0), 201).with_initial(1.0, 0.5);
        let m = MassProfile::default();
        for sol in [
            solve_mapping(&oscillator(), &m, &req).unwrap(),
            closed_form_mapping(&oscillator(), &m, &req).unwrap().unwrap(),
        ] {
            for (&u, &x) in sol.u().iter().zip(sol.xi()) {
                assert!((x - u * u / 2.0).abs() <= 1e-9 * x, "u={u} ξ={x}");
            }
            assert!(sol.max_residual(&oscillator(), &m) < 1e-8);
        }
    }

    #[test]
    fn derivatives_match_closed_form() {
        let spec = ConfluentSpec::new([3.0, 0.0, 0.0], 1.0, 0.0, 0.0).unwrap();
        let m = MassProfile::constant(1.5);
        let k = (8.0 * 1.5 / 3.0_f64).sqrt();
        let [d1, d2, d3] = mapping_derivatives(&spec, &m, Branch::Minus, 0.3, 2.0);
        assert!((d1 + 2.0 * k).abs() < 1e-12);
        assert!((d2 - 2.0 * k * k).abs() < 1e-12);
        assert!((d3 + 2.0 * k * k * k).abs() < 1e-11);
    }

    #[test]
    fn clips_at_xi_zero() {
        // ξ = u²/2 reaches the ξ floor near u = 1.4e-7.
        let req = MappingRequest::new((-1.0, 4.0), 501).with_initial(1.0, 0.5);
        let m = MassProfile::default();
        let sol = solve_mapping(&oscillator(), &m, &req).unwrap();
        assert_eq!(sol.clipped(), (true, false));
        assert!(sol.domain().0 > 0.0 && sol.domain().0 < 0.02);
        let cf = closed_form_mapping(&oscillator(), &m, &req).unwrap().unwrap();
        assert_eq!(cf.clipped(), (true, false));
    }

    #[test]
    fn rejects_bad_initial_conditions() {
        let m = MassProfile::default();
        let spec = ConfluentSpec::new([-1.0, 0.0, 0.0], 0.0, 0.0, 0.0).unwrap();
        let req = MappingRequest::new((0.0, 1.0), 51);
        assert!(matches!(solve_mapping(&spec, &m, &req), Err(Error::Singular { .. })));
        let req = MappingRequest::new((0.0, 1.0), 51).with_initial(2.0, 1.0);
        assert!(matches!(solve_mapping(&oscillator(), &m, &req), Err(Error::Domain(_))));
    }

    #[test]
    fn degenerate_domain_is_reported() {
        // Starting right at the ξ floor leaves almost nothing of the negative side.
        let req = MappingRequest::new((0.0, 1.0), 101)
            .with_initial(1.0, 1e-13)
            .with_branch(Branch::Plus);
        let m = MassProfile::default();
        let err = solve_mapping(&oscillator(), &m, &req).unwrap_err();
        assert!(matches!(err, Error::DegenerateDomain(_)), "{err}");
    }

    #[test]
    fn branch_serde() {
        let b: Branch = serde_json::from_str("-1").unwrap();
        assert_eq!(b, Branch::Minus);
        assert!(serde_json::from_str::<Branch>("0").is_err());
        assert_eq!(serde_json::to_string(&Branch::Plus).unwrap(), "1");
    }
}
