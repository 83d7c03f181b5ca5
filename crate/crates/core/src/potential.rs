//! The confluent Natanzon potential, the mass corrections and their sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{ConfluentSpec, MappingSolution, MassProfile};
use crate::specfun::{schwarzian_from_derivatives, DiffOperator, GridFunction, STENCIL_WIDTH};

/// von Roos ordering parameters; `ρ = −1 − η − ε` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingParams {
    pub eta: f64,
    pub epsilon: f64,
}

impl Default for OrderingParams {
    fn default() -> Self {
        Self {
            eta: 0.0,
            epsilon: -1.0,
        }
    }
}

impl OrderingParams {
    pub fn new(eta: f64, epsilon: f64) -> Result<Self> {
        if !(eta.is_finite() && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ordering parameters must be finite, got η = {eta}, ε = {epsilon}"
            )));
        }
        Ok(Self { eta, epsilon })
    }

    pub fn rho(&self) -> f64 {
        -1.0 - self.eta - self.epsilon
    }

    /// Coefficients `(k1, k2)` of `k1 m'²/m³ − k2 m''/m²` in the
    /// ordering-dependent correction.
    pub fn vm_coefficients(&self) -> (f64, f64) {
        let (eta, eps) = (self.eta, self.epsilon);
        let s = 1.0 + 2.0 * eta;
        ((s * s + 4.0 * eps * (1.0 + eta)) / 8.0, eps / 4.0)
    }

    /// Coefficients of the combined correction, same layout as
    /// [`vm_coefficients`](Self::vm_coefficients).
    pub fn ueff_coefficients(&self) -> (f64, f64) {
        let (eta, eps) = (self.eta, self.epsilon);
        let s = 1.0 + 2.0 * eta;
        (
            (4.0 * s * s + 16.0 * eps * (1.0 + eta) + 5.0) / 32.0,
            (2.0 * eps + 1.0) / 8.0,
        )
    }
}

/// Which potential enters the eigenproblem next to `−d/du (1/2m) d/du`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub enum PotentialMode {
    #[serde(rename = "V")]
    V,
    #[serde(rename = "V+Um")]
    PlusUm,
    #[default]
    #[serde(rename = "V+Ueff")]
    PlusUeff,
}

impl PotentialMode {
    pub const ALL: [PotentialMode; 3] = [PotentialMode::V, PotentialMode::PlusUm, PotentialMode::PlusUeff];

    pub fn label(self) -> &'static str {
        match self {
            PotentialMode::V => "V",
            PotentialMode::PlusUm => "V+Um",
            PotentialMode::PlusUeff => "V+Ueff",
        }
    }
}

impl std::str::FromStr for PotentialMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PotentialMode::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown potential mode {s:?}")))
    }
}

/// The three additive pieces of the potential at one `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VTerms {
    /// `(σ_β ξ² + σ_q0 ξ + σ_c) / R`.
    pub sigma: f64,
    /// `1 / R`.
    pub unit: f64,
    /// `(λ1 ξ − λ2 ξ²) / R²`.
    pub linear: f64,
    /// `−(5/4) ξ² Δ / R³`.
    pub discriminant: f64,
}

impl VTerms {
    pub fn total(&self) -> f64 {
        self.sigma + self.unit + self.linear + self.discriminant
    }
}

pub fn v_terms(spec: &ConfluentSpec, xi: f64) -> Result<VTerms> {
    let r = spec.r(xi);
    if !(r > 0.0) {
        return Err(Error::Singular {
            u: f64::NAN,
            reason: format!("R({xi}) = {r} is not positive"),
        });
    }
    let num = (spec.sigma_beta() * xi + spec.sigma_q0()).mul_add(xi, spec.sigma_c());
    Ok(VTerms {
        sigma: num / r,
        unit: 1.0 / r,
        linear: (spec.lambda1() * xi - spec.lambda2() * xi * xi) / (r * r),
        discriminant: -1.25 * xi * xi * spec.delta() / (r * r * r),
    })
}

/// `V(ξ)` for a single coordinate value.
pub fn v_of_xi(spec: &ConfluentSpec, xi: f64) -> Result<f64> {
    v_terms(spec, xi).map(|t| t.total())
}

/// The potential on the mapping grid.
pub fn eval_v(spec: &ConfluentSpec, mapping: &MappingSolution) -> Result<GridFunction> {
    let values = mapping
        .u()
        .iter()
        .zip(mapping.xi())
        .map(|(&u, &xi)| {
            v_of_xi(spec, xi).map_err(|e| match e {
                Error::Singular { reason, .. } => Error::Singular { u, reason },
                other => other,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(mapping.u().to_vec(), values)
}

/// Mass corrections sampled on a grid.
#[derive(Debug, Clone)]
pub struct MassCorrections {
    /// Ordering-dependent part.
    pub vm: GridFunction,
    /// Ordering-free part coming from the Schwarzian split.
    pub um: GridFunction,
    /// `vm + um`, evaluated from its own closed form.
    pub ueff: GridFunction,
}

/// `U_m = (5/32) m'²/m³ − (1/8) m''/m²` at one point.
pub fn um_at(mass: &MassProfile, u: f64) -> f64 {
    let [m, m1, m2] = mass.eval(u);
    5.0 / 32.0 * m1 * m1 / (m * m * m) - 0.125 * m2 / (m * m)
}

pub fn eval_mass_corrections(
    mass: &MassProfile,
    ordering: &OrderingParams,
    u: &[f64],
) -> Result<MassCorrections> {
    let (a1, a2) = ordering.vm_coefficients();
    let (b1, b2) = ordering.ueff_coefficients();
    let n = u.len();
    let (mut vm, mut um, mut ueff) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &x in u {
        let [m, m1, m2] = mass.eval(x);
        if !(m > 0.0) {
            return Err(Error::Singular {
                u: x,
                reason: format!("mass {m} is not positive"),
            });
        }
        let p = m1 * m1 / (m * m * m);
        let q = m2 / (m * m);
        vm.push(a1 * p - a2 * q);
        um.push(5.0 / 32.0 * p - 0.125 * q);
        ueff.push(b1 * p - b2 * q);
    }
    Ok(MassCorrections {
        vm: GridFunction::new(u.to_vec(), vm)?,
        um: GridFunction::new(u.to_vec(), um)?,
        ueff: GridFunction::new(u.to_vec(), ueff)?,
    })
}

/// Potential pieces on the mapping grid plus the selected total.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    pub u: Vec<f64>,
    pub xi: Vec<f64>,
    pub v: Vec<f64>,
    pub vm: Vec<f64>,
    pub um: Vec<f64>,
    pub ueff: Vec<f64>,
    pub total: Vec<f64>,
    pub ordering: OrderingParams,
    pub mode: PotentialMode,
}

impl PotentialTable {
    /// Total potential for any mode, independent of the stored one.
    pub fn total_for(&self, mode: PotentialMode) -> Vec<f64> {
        match mode {
            PotentialMode::V => self.v.clone(),
            PotentialMode::PlusUm => self.v.iter().zip(&self.um).map(|(a, b)| a + b).collect(),
            PotentialMode::PlusUeff => self.v.iter().zip(&self.ueff).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn with_mode(mut self, mode: PotentialMode) -> Self {
        self.total = self.total_for(mode);
        self.mode = mode;
        self
    }
}

pub fn assemble_effective(
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
    ordering: &OrderingParams,
    mode: PotentialMode,
) -> Result<PotentialTable> {
    let v = eval_v(spec, mapping)?.into_values();
    let corr = eval_mass_corrections(mass, ordering, mapping.u())?;
    let mut table = PotentialTable {
        u: mapping.u().to_vec(),
        xi: mapping.xi().to_vec(),
        v,
        vm: corr.vm.into_values(),
        um: corr.um.into_values(),
        ueff: corr.ueff.into_values(),
        total: Vec::new(),
        ordering: *ordering,
        mode,
    };
    table.total = table.total_for(mode);
    if let Some(i) = table.total.iter().position(|v| !v.is_finite()) {
        return Err(Error::Singular {
            u: table.u[i],
            reason: "total potential is not finite".to_string(),
        });
    }
    Ok(table)
}

/// Pointwise residual of the Schwarzian split, relative to the size of the
/// largest term involved (plain absolute where all terms are below one).
///
/// Uses the derivatives stored with the mapping, which for integrated
/// mappings come from the ODE right-hand side.
pub fn schwarzian_split_residuals(
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
) -> Result<Vec<f64>> {
    split_residuals(spec, mapping, mass, [mapping.xi_d1(), mapping.xi_d2(), mapping.xi_d3()])
}

/// Same residual with `ξ', ξ'', ξ'''` taken by finite differences of the
/// sampled `ξ`, so an integrated mapping is checked through its samples.
pub fn schwarzian_split_residuals_sampled(
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
) -> Result<Vec<f64>> {
    let d = (1..=3)
        .map(|k| Ok(DiffOperator::new(mapping.u(), k, STENCIL_WIDTH)?.apply(mapping.xi())))
        .collect::<Result<Vec<_>>>()?;
    split_residuals(spec, mapping, mass, [&d[0], &d[1], &d[2]])
}

fn split_residuals(
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
    d: [&[f64]; 3],
) -> Result<Vec<f64>> {
    let rdd = spec.r_ddot();
    let mut out = Vec::with_capacity(mapping.len());
    for i in 0..mapping.len() {
        let u = mapping.u()[i];
        let xi = mapping.xi()[i];
        let m = mass.value(u);
        let s = schwarzian_from_derivatives(d[0][i], d[1][i], d[2][i], u)?;
        let lhs = s / (4.0 * m);
        let r = spec.r(xi);
        let rd = spec.r_dot(xi);
        let terms = [
            -1.0 / r,
            -(xi * xi * rdd + xi * rd) / (r * r),
            1.25 * xi * xi * rd * rd / (r * r * r),
            -um_at(mass, u),
        ];
        let rhs: f64 = terms.iter().sum();
        let scale = terms.iter().fold(lhs.abs().max(1.0), |a, t| a.max(t.abs()));
        out.push((lhs - rhs).abs() / scale);
    }
    Ok(out)
}

pub fn check_schwarzian_split(
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
) -> Result<f64> {
    Ok(schwarzian_split_residuals(spec, mapping, mass)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Largest entry of [`schwarzian_split_residuals_sampled`].
pub fn check_schwarzian_split_sampled(
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
) -> Result<f64> {
    Ok(schwarzian_split_residuals_sampled(spec, mapping, mass)?
        .into_iter()
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{closed_form_mapping, MappingRequest};

    #[test]
    fn trivial_spec_gives_unit_potential() {
        let spec = ConfluentSpec::new([1.0, 0.0, 0.0], 0.0, 0.0, 0.0).unwrap();
        for xi in [1e-3, 0.5, 7.0] {
            assert_eq!(v_of_xi(&spec, xi).unwrap(), 1.0);
        }
    }

    #[test]
    fn oscillator_reduction() {
        let spec = ConfluentSpec::new([0.0, 4.0, 0.0], 4.0, 0.0, 0.0).unwrap();
        let req = MappingRequest::new((0.1, 5.0), 50).with_initial(1.0, 0.5);
        let m = MassProfile::default();
        let map = closed_form_mapping(&spec, &m, &req).unwrap().unwrap();
        let v = eval_v(&spec, &map).unwrap();
        for (&u, &val) in v.u().iter().zip(v.values()) {
            let expect = u * u / 2.0 + 3.0 / (8.0 * u * u);
            assert!((val - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn corrections_vanish_for_constant_mass_and_special_ordering() {
        let u: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let c = eval_mass_corrections(&MassProfile::constant(2.0), &OrderingParams::default(), &u)
            .unwrap();
        assert!(c.vm.values().iter().chain(c.um.values()).chain(c.ueff.values()).all(|&v| v == 0.0));
        let ord = OrderingParams::new(-0.5, 0.0).unwrap();
        let c = eval_mass_corrections(&MassProfile::sech2(1.0, 0.7, 1.3), &ord, &u).unwrap();
        assert!(c.vm.values().iter().all(|&v| v == 0.0));
        assert!(c.um.values().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn sech2_corrections_match_fd_mass_derivatives() {
        let mass = MassProfile::sech2(1.2, 0.6, 0.9);
        let ord = OrderingParams::new(0.3, -0.7).unwrap();
        let x = 0.37;
        let h = 1e-3;
        let f = |t: f64| mass.value(t);
        let m = f(x);
        // Fourth-order central differences.
        let m1 = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let m2 = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * m + 16.0 * f(x + h) - f(x + 2.0 * h))
            / (12.0 * h * h);
        let (eta, eps): (f64, f64) = (0.3, -0.7);
        let vm = ((1.0 + 2.0 * eta).powi(2) + 4.0 * eps * (1.0 + eta)) / 8.0 * m1 * m1 / m.powi(3)
            - eps / 4.0 * m2 / (m * m);
        let c = eval_mass_corrections(&mass, &ord, &[x]).unwrap();
        assert!((c.vm.values()[0] - vm).abs() < 1e-8);
        let um = 5.0 / 32.0 * m1 * m1 / m.powi(3) - m2 / (8.0 * m * m);
        assert!((c.um.values()[0] - um).abs() < 1e-8);
        let sum = c.vm.values()[0] + c.um.values()[0];
        assert!((c.ueff.values()[0] - sum).abs() < 1e-14);
    }

    #[test]
    fn mode_labels_round_trip() {
        for m in PotentialMode::ALL {
            assert_eq!(m.label().parse::<PotentialMode>().unwrap(), m);
        }
        assert!("V+X".parse::<PotentialMode>().is_err());
    }
}
