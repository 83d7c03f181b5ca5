//! Bound-state wavefunctions and the mass-weighted scalar product.
//!
//! `ψ̄ = √m χ`; the weighted product `∫ χ_f m χ_g du` is the plain
//! `∫ ψ̄_f ψ̄_g du`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{ConfluentSpec, MappingSolution, MassProfile};
use crate::quadrature::simpson;
use crate::specfun::{DiffOperator, KummerPoly, STENCIL_WIDTH};
use crate::spectrum::BoundState;

/// Where the level parameter `a` enters the closed-form wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `ξ^{(b−1)/2} e^{−ξ/2} ₁F₁(−n; b; aξ)`.
    Bare,
    /// `(aξ)^{(b−1)/2} e^{−aξ/2} ₁F₁(−n; b; aξ)`.
    #[default]
    Scaled,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Bare, Variant::Scaled];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Bare => "bare",
            Variant::Scaled => "scaled",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variant {s:?}")))
    }
}

/// Sampled wavefunction of one bound state.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionSamples {
    u: Vec<f64>,
    psi_bar: Vec<f64>,
    chi: Vec<f64>,
    norm: f64,
    variant: Variant,
    state: BoundState,
}

/// Samples with `|ψ̄| ≤ NODE_FLOOR · peak` are ignored when counting nodes.
pub const NODE_FLOOR: f64 = 1e-9;

impl WavefunctionSamples {
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn psi_bar(&self) -> &[f64] {
        &self.psi_bar
    }

    /// Physical wavefunction `χ = ψ̄ / √m`.
    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// `√⟨ψ̄|ψ̄⟩_W` of the stored samples.
    pub fn weighted_norm(&self) -> f64 {
        self.norm
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn state(&self) -> &BoundState {
        &self.state
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm - 1.0).abs() < 1e-12
    }

    /// Same state scaled to unit weighted norm.
    pub fn normalized(&self) -> Self {
        let k = 1.0 / self.norm;
        Self {
            u: self.u.clone(),
            psi_bar: self.psi_bar.iter().map(|v| v * k).collect(),
            chi: self.chi.iter().map(|v| v * k).collect(),
            norm: 1.0,
            variant: self.variant,
            state: self.state,
        }
    }

    fn peak(&self) -> f64 {
        self.psi_bar.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Sign changes of `ψ̄` on the grid, ignoring negligible samples.
    pub fn node_count(&self) -> usize {
        let floor = NODE_FLOOR * self.peak();
        let mut last = 0.0_f64;
        let mut count = 0;
        for &v in &self.psi_bar {
            if v.abs() <= floor {
                continue;
            }
            if last != 0.0 && (v < 0.0) != (last < 0.0) {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Largest end-point magnitude relative to the peak.
    pub fn tail_ratio(&self) -> (f64, f64) {
        let p = self.peak();
        (
            self.psi_bar[0].abs() / p,
            self.psi_bar[self.psi_bar.len() - 1].abs() / p,
        )
    }
}

/// Closed-form `ψ̄` for `state` on the mapping grid, unnormalized.
///
/// All factors are combined in log space and shifted by their maximum, so
/// the stored samples have a peak of order one whatever the exponents.
pub fn build_wavefunction(
    state: &BoundState,
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
    variant: Variant,
) -> Result<WavefunctionSamples> {
    if !(state.a > 0.0 && state.b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "level parameters a = {}, b = {} fail the normalizability gate",
            state.a, state.b
        )));
    }
    let poly = KummerPoly::new(state.n, state.b, state.a)?;
    let s = match variant {
        Variant::Bare => 1.0,
        Variant::Scaled => state.a,
    };
    let n = mapping.len();
    let mut logs = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    for (&u, &xi) in mapping.u().iter().zip(mapping.xi()) {
        let m = mass.value(u);
        let r = spec.r(xi);
        if !(m > 0.0 && r > 0.0 && xi > 0.0) {
            return Err(Error::Singular {
                u,
                reason: format!("m = {m}, R = {r}, ξ = {xi}"),
            });
        }
        masses.push(m);
        logs.push(0.25 * m.ln() + 0.25 * r.ln() + 0.5 * (state.b - 1.0) * (s * xi).ln() - 0.5 * s * xi);
    }
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let psi_bar: Vec<f64> = logs
        .iter()
        .zip(mapping.xi())
        .map(|(l, &xi)| (l - shift).exp() * poly.eval(xi))
        .collect();
    let chi = psi_bar.iter().zip(&masses).map(|(p, m)| p / m.sqrt()).collect();
    let norm2 = simpson(mapping.u(), &psi_bar.iter().map(|p| p * p).collect::<Vec<_>>())?;
    if !(norm2.is_finite() && norm2 > 0.0) {
        return Err(Error::DivergentNorm(format!(
            "weighted norm² = {norm2} for n = {}",
            state.n
        )));
    }
    Ok(WavefunctionSamples {
        u: mapping.u().to_vec(),
        psi_bar,
        chi,
        norm: norm2.sqrt(),
        variant,
        state: *state,
    })
}

/// `⟨g|f⟩_W = ∫ χ_f m χ_g du = ∫ ψ̄_f ψ̄_g du`.
pub fn weighted_inner_product(f: &WavefunctionSamples, g: &WavefunctionSamples) -> Result<f64> {
    if f.u != g.u {
        return Err(Error::GridMismatch);
    }
    let prod: Vec<f64> = f.psi_bar.iter().zip(&g.psi_bar).map(|(a, b)| a * b).collect();
    simpson(&f.u, &prod)
}

/// Same product evaluated in the physical picture with explicit weight `m`.
pub fn weighted_inner_product_chi(
    f: &WavefunctionSamples,
    g: &WavefunctionSamples,
    mass: &MassProfile,
) -> Result<f64> {
    if f.u != g.u {
        return Err(Error::GridMismatch);
    }
    let prod: Vec<f64> = f
        .u
        .iter()
        .zip(f.chi.iter().zip(&g.chi))
        .map(|(&u, (a, b))| a * mass.value(u) * b)
        .collect();
    simpson(&f.u, &prod)
}

/// Gram matrix of the states under the weighted product.
pub fn gram_matrix(states: &[WavefunctionSamples]) -> Result<Vec<Vec<f64>>> {
    states
        .iter()
        .map(|f| states.iter().map(|g| weighted_inner_product(f, g)).collect())
        .collect()
}

/// Largest entrywise deviation of a Gram matrix from the identity.
pub fn orthonormality_residual(gram: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst
}

/// Outcome of the stationary continuity check for a pair of states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityCheck {
    /// `|(E1 − E2) ⟨ψ̄2|ψ̄1⟩_W|` for normalized states.
    pub residual: f64,
    /// `|[(ψ̄1 ψ̄2' − ψ̄2 ψ̄1') / 2m]|` between the domain ends.
    pub boundary_flux: f64,
    pub flagged: bool,
}

/// Default threshold above which [`continuity_check`] flags a pair.
pub const CONTINUITY_TOL: f64 = 1e-6;

/// For two eigenstates of `−d/du (1/2m) d/du + V`, `(E1 − E2)⟨ψ̄2|ψ̄1⟩_W`
/// equals the boundary flux, which vanishes for bound states; a nonzero
/// value reveals truncated tails or states of different operators.
pub fn continuity_check(
    mass: &MassProfile,
    f: &WavefunctionSamples,
    g: &WavefunctionSamples,
    tol: f64,
) -> Result<ContinuityCheck> {
    if f.u != g.u {
        return Err(Error::GridMismatch);
    }
    let (f, g) = (f.normalized(), g.normalized());
    let de = f.state.energy - g.state.energy;
    let residual = if de == 0.0 {
        0.0
    } else {
        (de * weighted_inner_product(&f, &g)?).abs()
    };
    let d = DiffOperator::new(&f.u, 1, STENCIL_WIDTH)?;
    let (df, dg) = (d.apply(&f.psi_bar), d.apply(&g.psi_bar));
    let flux = |i: usize| (f.psi_bar[i] * dg[i] - g.psi_bar[i] * df[i]) / (2.0 * mass.value(f.u[i]));
    let boundary_flux = (flux(f.u.len() - 1) - flux(0)).abs();
    Ok(ContinuityCheck {
        residual,
        boundary_flux,
        flagged: residual > tol || boundary_flux > tol,
    })
}

/// `√(m/|ξ'|) ξ^{1/2} / (m^{1/4} R^{1/4})` at every node; constant `8^{−1/4}`
/// whenever the mapping satisfies its ODE.
pub fn prefactor_ratio(
    spec: &ConfluentSpec,
    mapping: &MappingSolution,
    mass: &MassProfile,
) -> Vec<f64> {
    mapping
        .u()
        .iter()
        .zip(mapping.xi().iter().zip(mapping.xi_d1()))
        .map(|(&u, (&xi, &d1))| {
            let m = mass.value(u);
            (m / d1.abs()).sqrt() * xi.sqrt() / (m.powf(0.25) * spec.r(xi).powf(0.25))
        })
        .collect()
}
