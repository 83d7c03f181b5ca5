//! Finite-difference eigensolver for `−d/du (1/2m) d/du + V` and the
//! validation pipeline comparing it with the closed-form results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result, Stage};
use crate::mapping::{best_mapping, Branch, ConfluentSpec, MappingRequest, MassProfile};
use crate::potential::{assemble_effective, OrderingParams, PotentialMode};
use crate::quadrature::simpson;
use crate::spectrum::{solve_levels, BoundState, Level};
use crate::wavefunc::{build_wavefunction, gram_matrix, Variant, WavefunctionSamples};

/// Smallest grid the oracle accepts.
pub const MIN_FD_POINTS: usize = 201;
/// Largest number of eigenpairs [`eigen_lowest`] returns.
pub const MAX_EIGENPAIRS: usize = 12;

const INVERSE_ITERATIONS: usize = 12;

/// Grid, mass and total potential of one Dirichlet problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FdProblem {
    u: Vec<f64>,
    mass: Vec<f64>,
    potential: Vec<f64>,
}

impl FdProblem {
    /// `u` must be uniform; the end nodes carry the zero boundary values.
    pub fn new(u: Vec<f64>, mass: Vec<f64>, potential: Vec<f64>) -> Result<Self> {
        let n = u.len();
        if n < MIN_FD_POINTS {
            return Err(Error::GridTooSmall {
                needed: MIN_FD_POINTS,
                got: n,
            });
        }
        if mass.len() != n || potential.len() != n {
            return Err(Error::GridMismatch);
        }
        let h = (u[n - 1] - u[0]) / (n - 1) as f64;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {h}")));
        }
        if let Some(i) = (1..n).find(|&i| ((u[i] - u[i - 1]) - h).abs() > 1e-6 * h) {
            return Err(Error::InvalidGrid(format!(
                "grid is not uniform near u = {}",
                u[i]
            )));
        }
        if let Some(i) = mass.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::Singular {
                u: u[i],
                reason: format!("mass {} is not positive", mass[i]),
            });
        }
        if let Some(i) = potential.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular {
                u: u[i],
                reason: "potential is not finite".to_string(),
            });
        }
        Ok(Self { u, mass, potential })
    }

    /// Samples `mass` and `potential` on `u`.
    pub fn from_fn(
        u: Vec<f64>,
        mass: impl Fn(f64) -> f64,
        potential: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let m = u.iter().map(|&x| mass(x)).collect();
        let v = u.iter().map(|&x| potential(x)).collect();
        Self::new(u, m, v)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn spacing(&self) -> f64 {
        (self.u[self.u.len() - 1] - self.u[0]) / (self.u.len() - 1) as f64
    }
}

/// Symmetric tridiagonal matrix stored as diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "{} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".to_string()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i + 1 < n {
                a[i][i + 1] = self.off[i];
                a[i + 1][i] = self.off[i];
            }
        }
        a
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivmin(&self) -> f64 {
        let e2 = self.off.iter().fold(1.0_f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * e2
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Solves `(A − σ) x = b` by LU with partial pivoting.
    fn solve_shifted(&self, sigma: f64, b: &mut [f64]) {
        let n = self.len();
        let tiny = f64::EPSILON * self.norm().max(f64::MIN_POSITIVE);
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }
}

/// The 3-point Sturm–Liouville stencil on the interior nodes, with
/// midpoint masses `(m_i + m_{i+1})/2`.
pub fn discretize(problem: &FdProblem) -> SymTridiagonal {
    let n = problem.u.len();
    let h = problem.spacing();
    let k = 1.0 / (2.0 * h * h);
    let inv_mid: Vec<f64> = problem
        .mass
        .windows(2)
        .map(|w| 2.0 / (w[0] + w[1]))
        .collect();
    let diag = (1..n - 1)
        .map(|i| k * (inv_mid[i - 1] + inv_mid[i]) + problem.potential[i])
        .collect();
    let off = (1..n - 2).map(|i| -k * inv_mid[i]).collect();
    SymTridiagonal { diag, off }
}

/// Lowest eigenpairs; vectors have unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `‖(A − λ)v‖` for each pair.
    pub residuals: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

/// The `k` algebraically smallest eigenpairs: bisection on Sturm counts for
/// the values, inverse iteration for the vectors. Vector signs are fixed so
/// that the first component above 1e-3 of the maximum is positive.
pub fn eigen_lowest(op: &SymTridiagonal, k: usize) -> Result<Eigenpairs> {
    if k > MAX_EIGENPAIRS {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_EIGENPAIRS} eigenpairs, asked for {k}"
        )));
    }
    if k > op.len() {
        return Err(Error::InvalidParameter(format!(
            "{k} eigenpairs from a matrix of order {}",
            op.len()
        )));
    }
    let (glo, ghi) = op.gershgorin();
    let spread = (ghi - glo).max(f64::MIN_POSITIVE);
    let (glo, ghi) = (glo - 1e-10 * spread, ghi + 1e-10 * spread);
    let norm = op.norm();
    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        let (mut lo, mut hi) = (values.last().copied().unwrap_or(glo).min(ghi), ghi);
        if op.sturm_count(lo) > j {
            lo = glo;
        }
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + op.pivmin();
            if hi - lo <= tol || mid <= lo || mid >= hi {
                break;
            }
            if op.sturm_count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        values.push(0.5 * (lo + hi));
    }

    let tol = (32.0 * f64::EPSILON * norm).max(1e-13);
    let ortho_gap = 1e-3 * norm;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (j, &lambda) in values.iter().enumerate() {
        let mut v: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut v);
        let mut res = f64::INFINITY;
        for _ in 0..INVERSE_ITERATIONS {
            op.solve_shifted(lambda, &mut v);
            for (prev, &mu) in vectors.iter().zip(&values) {
                if (mu - lambda).abs() < ortho_gap {
                    let c = dot(&v, prev);
                    v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
                }
            }
            if !normalize(&mut v).is_finite() {
                return Err(Error::Convergence(format!(
                    "inverse iteration broke down for eigenvalue {j}"
                )));
            }
            let av = op.mul_vec(&v);
            res = av
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - lambda * x).powi(2))
                .sum::<f64>()
                .sqrt();
            if res <= tol {
                break;
            }
        }
        if !(res <= 1e3 * tol) {
            return Err(Error::Convergence(format!(
                "eigenvector {j} residual {res:e} after {INVERSE_ITERATIONS} inverse iterations"
            )));
        }
        let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * peak) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        vectors.push(v);
        residuals.push(res);
    }
    Ok(Eigenpairs {
        values,
        vectors,
        residuals,
    })
}

/// Eigenpairs of a problem with vectors extended by the boundary zeros and
/// scaled to `∫ v² du = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleStates {
    pub u: Vec<f64>,
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn solve_problem(problem: &FdProblem, k: usize) -> Result<OracleStates> {
    let pairs = eigen_lowest(&discretize(problem), k)?;
    let h = problem.spacing();
    let vectors = pairs
        .vectors
        .into_iter()
        .map(|v| {
            let mut full = Vec::with_capacity(v.len() + 2);
            full.push(0.0);
            full.extend(v.iter().map(|x| x / h.sqrt()));
            full.push(0.0);
            full
        })
        .collect();
    Ok(OracleStates {
        u: problem.u.clone(),
        energies: pairs.values,
        vectors,
    })
}

/// `|∫ f g| / √(∫ f² ∫ g²)` by Simpson quadrature on `u`.
pub fn overlap(u: &[f64], f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != u.len() || g.len() != u.len() {
        return Err(Error::GridMismatch);
    }
    let prod = |a: &[f64], b: &[f64]| simpson(u, &a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>());
    let fg = prod(f, g)?;
    let ff = prod(f, f)?;
    let gg = prod(g, g)?;
    if !(ff > 0.0 && gg > 0.0) {
        return Err(Error::DivergentNorm("zero function in overlap".to_string()));
    }
    Ok((fg.abs() / (ff * gg).sqrt()).min(1.0))
}

/// Either a fixed choice or `"auto"`, resolved by calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection<T> {
    #[default]
    Auto,
    Fixed(T),
}

/// Labels shared by the two calibrated settings.
pub trait Choice: Copy + PartialEq + std::str::FromStr<Err = Error> + 'static {
    const CANDIDATES: &'static [Self];
    fn label(self) -> &'static str;
}

impl Choice for PotentialMode {
    // Default first so ties keep it.
    const CANDIDATES: &'static [Self] = &[PotentialMode::PlusUeff, PotentialMode::PlusUm, PotentialMode::V];

    fn label(self) -> &'static str {
        PotentialMode::label(self)
    }
}

impl Choice for Variant {
    const CANDIDATES: &'static [Self] = &[Variant::Scaled, Variant::Bare];

    fn label(self) -> &'static str {
        Variant::label(self)
    }
}

impl<T: Choice> Selection<T> {
    pub fn candidates(&self) -> Vec<T> {
        match self {
            Selection::Auto => T::CANDIDATES.to_vec(),
            Selection::Fixed(t) => vec![*t],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Selection::Auto => "auto",
            Selection::Fixed(t) => t.label(),
        }
    }
}

impl<T: Choice> std::str::FromStr for Selection<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(Selection::Auto)
        } else {
            s.parse().map(Selection::Fixed)
        }
    }
}

impl<T: Choice> Serialize for Selection<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de, T: Choice> Deserialize<'de> for Selection<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Mode picked when nothing else is requested; fixed by calibration runs.
pub const CALIBRATED_MODE: PotentialMode = PotentialMode::PlusUeff;
/// Variant picked when nothing else is requested; fixed by calibration runs.
pub const CALIBRATED_VARIANT: Variant = Variant::Scaled;

/// A candidate passes calibration below this relative energy error...
pub const CALIBRATION_ENERGY_TOL: f64 = 1e-3;
/// ...and above this ground-state overlap.
pub const CALIBRATION_OVERLAP_TOL: f64 = 0.9999;

/// Everything [`validate`] needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSetup {
    pub spec: ConfluentSpec,
    pub mass: MassProfile,
    #[serde(default)]
    pub ordering: OrderingParams,
    #[serde(default = "default_mode")]
    pub mode: Selection<PotentialMode>,
    #[serde(default = "default_variant")]
    pub variant: Selection<Variant>,
    pub n_max: u32,
    pub domain: (f64, f64),
    pub points: usize,
    #[serde(default)]
    pub u0: Option<f64>,
    #[serde(default = "default_xi0")]
    pub xi0: f64,
    #[serde(default)]
    pub branch: Branch,
    /// Tail threshold relative to the peak of `ψ̄`.
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    /// Domain extensions tried when tails exceed `tail_tol`.
    #[serde(default = "default_max_padding")]
    pub max_padding: usize,
}

fn default_mode() -> Selection<PotentialMode> {
    Selection::Fixed(CALIBRATED_MODE)
}

fn default_variant() -> Selection<Variant> {
    Selection::Fixed(CALIBRATED_VARIANT)
}

fn default_xi0() -> f64 {
    1.0
}

fn default_tail_tol() -> f64 {
    1e-10
}

fn default_max_padding() -> usize {
    4
}

impl ValidationSetup {
    pub fn new(spec: ConfluentSpec, mass: MassProfile, domain: (f64, f64), points: usize) -> Self {
        Self {
            spec,
            mass,
            ordering: OrderingParams::default(),
            mode: default_mode(),
            variant: default_variant(),
            n_max: 3,
            domain,
            points,
            u0: None,
            xi0: 1.0,
            branch: Branch::Plus,
            tail_tol: default_tail_tol(),
            max_padding: default_max_padding(),
        }
    }

    pub fn with_initial(mut self, u0: f64, xi0: f64) -> Self {
        self.u0 = Some(u0);
        self.xi0 = xi0;
        self
    }

    pub fn with_n_max(mut self, n_max: u32) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_mode(mut self, mode: Selection<PotentialMode>) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_variant(mut self, variant: Selection<Variant>) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_ordering(mut self, ordering: OrderingParams) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    fn request(&self, domain: (f64, f64), points: usize) -> MappingRequest {
        let mut req = MappingRequest::new(domain, points).with_branch(self.branch);
        req.u0 = self.u0;
        req.xi0 = self.xi0;
        req
    }
}

/// One compared bound state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u32,
    pub closed_form_energy: f64,
    pub oracle_energy: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    /// `|⟨ψ̄_n|v_n⟩|` for normalized closed-form and oracle states.
    pub overlap: f64,
    /// Largest deviation of row `n` of the closed-form Gram matrix from the identity.
    pub orthonormality: f64,
    pub nodes: usize,
    pub oracle_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeScore {
    pub mode: PotentialMode,
    /// Largest `|ΔE|/|E|` over the compared states.
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantScore {
    pub variant: Variant,
    pub ground_overlap: f64,
    pub min_overlap: f64,
}

/// Scores of every candidate tried and the winners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub requested_mode: Selection<PotentialMode>,
    pub requested_variant: Selection<Variant>,
    pub modes: Vec<ModeScore>,
    pub variants: Vec<VariantScore>,
    pub mode: PotentialMode,
    pub variant: Variant,
    /// Exactly one candidate mode passes [`CALIBRATION_ENERGY_TOL`].
    pub unique_mode: bool,
    /// Exactly one candidate variant passes [`CALIBRATION_OVERLAP_TOL`].
    pub unique_variant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub domain: (f64, f64),
    pub requested_domain: (f64, f64),
    pub points: usize,
    pub spacing: f64,
    pub padding_steps: usize,
    /// `|ψ̄|` at each end relative to its peak, worst over the states.
    pub tails: (f64, f64),
    pub mapping_closed_form: bool,
    pub mapping_residual: f64,
}

/// Result of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub schema_version: String,
    pub spec: ConfluentSpec,
    pub mass: MassProfile,
    pub ordering: OrderingParams,
    pub mode: PotentialMode,
    pub variant: Variant,
    pub n_max: u32,
    pub grid: GridInfo,
    pub calibration: Calibration,
    pub rows: Vec<ReportRow>,
    pub no_root: Vec<u32>,
    /// Largest entry of `|G − I|` for the oracle vectors.
    pub oracle_orthonormality: f64,
}

pub const REPORT_SCHEMA_VERSION: &str = "1";

impl SpectralReport {
    pub fn max_abs_error(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.abs_error))
    }

    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.rel_error))
    }

    pub fn min_overlap(&self) -> f64 {
        self.rows.iter().fold(1.0, |m, r| m.min(r.overlap))
    }
}

/// Sampled comparison data for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateComparison {
    pub n: u32,
    pub u: Vec<f64>,
    pub psi_bar: Vec<f64>,
    pub chi: Vec<f64>,
    /// Oracle vector with `∫ v² du = 1`, sign matched to `ψ̄`.
    pub oracle: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub report: SpectralReport,
    pub states: Vec<StateComparison>,
}

/// Runs the pipeline and keeps only the report.
pub fn validate(setup: &ValidationSetup) -> Result<SpectralReport> {
    validate_full(setup).map(|v| v.report)
}

struct Attempt {
    mapping: crate::mapping::MappingSolution,
    /// States and worst end-point ratios per variant.
    waves: Vec<(Variant, Vec<WavefunctionSamples>, (f64, f64))>,
}

impl Attempt {
    fn tails(&self) -> (f64, f64) {
        self.waves[0].2
    }
}

fn build_attempt(
    setup: &ValidationSetup,
    states: &[BoundState],
    variants: &[Variant],
    domain: (f64, f64),
    points: usize,
) -> Result<Attempt> {
    let mapping = best_mapping(&setup.spec, &setup.mass, &setup.request(domain, points))
        .map_err(Error::at(Stage::Mapping))?;
    let mut waves = Vec::new();
    for &v in variants {
        let mut tails = (0.0_f64, 0.0_f64);
        let w = states
            .iter()
            .map(|s| build_wavefunction(s, &setup.spec, &mapping, &setup.mass, v).map(|w| w.normalized()))
            .collect::<Result<Vec<_>>>()
            .map_err(Error::at(Stage::Wavefunction))?;
        for s in &w {
            let (a, b) = s.tail_ratio();
            tails = (tails.0.max(a), tails.1.max(b));
        }
        waves.push((v, w, tails));
    }
    Ok(Attempt { mapping, waves })
}

/// Full pipeline: levels, mapping, potential per mode, oracle, wavefunctions
/// per variant, with calibration of `auto` choices.
///
/// The domain is extended by half its width on any side where a closed-form
/// state is not yet below `tail_tol` of its peak, keeping the grid spacing.
pub fn validate_full(setup: &ValidationSetup) -> Result<Validation> {
    if setup.n_max as usize >= MAX_EIGENPAIRS {
        return Err(Error::InvalidParameter(format!(
            "n_max = {} exceeds the oracle limit of {} states",
            setup.n_max,
            MAX_EIGENPAIRS - 1
        )));
    }
    if setup.points < MIN_FD_POINTS {
        return Err(Error::GridTooSmall {
            needed: MIN_FD_POINTS,
            got: setup.points,
        });
    }
    let levels = solve_levels(&setup.spec, setup.n_max).map_err(Error::at(Stage::Spectrum))?;
    let states: Vec<BoundState> = levels.iter().filter_map(Level::bound).copied().collect();
    let no_root = levels
        .iter()
        .filter(|l| l.bound().is_none())
        .map(Level::n)
        .collect();
    if states.is_empty() {
        return Err(Error::Stage {
            stage: Stage::Spectrum,
            source: Box::new(Error::Domain("no bound state up to n_max".to_string())),
        });
    }
    // Levels are indexed by n, which must be contiguous from 0 for the
    // oracle ordering to line up.
    if let Some((i, s)) = states.iter().enumerate().find(|(i, s)| s.n as usize != *i) {
        return Err(Error::Stage {
            stage: Stage::Spectrum,
            source: Box::new(Error::Domain(format!(
                "level {} has no root while level {} does",
                i, s.n
            ))),
        });
    }

    let variants = setup.variant.candidates();
    let (mut a, mut b) = setup.domain;
    let h = (b - a) / (setup.points - 1) as f64;
    let mut points = setup.points;
    let mut padding_steps = 0;
    let mut attempt = build_attempt(setup, &states, &variants[..1], (a, b), points)?;
    while padding_steps < setup.max_padding {
        let (lo_clip, hi_clip) = attempt.mapping.clipped();
        let tails = attempt.tails();
        let grow_lo = tails.0 > setup.tail_tol && !lo_clip;
        let grow_hi = tails.1 > setup.tail_tol && !hi_clip;
        if !(grow_lo || grow_hi) {
            break;
        }
        let ext = ((0.5 * (b - a) / h).round() as usize).max(1);
        if grow_lo {
            a -= ext as f64 * h;
            points += ext;
        }
        if grow_hi {
            b += ext as f64 * h;
            points += ext;
        }
        padding_steps += 1;
        attempt = build_attempt(setup, &states, &variants[..1], (a, b), points)?;
    }
    if variants.len() > 1 {
        attempt = build_attempt(setup, &states, &variants, (a, b), points)?;
    }
    let mapping = &attempt.mapping;

    let k = states.len();
    let mut mode_scores = Vec::new();
    let mut best: Option<(PotentialMode, f64, OracleStates)> = None;
    for mode in setup.mode.candidates() {
        let table = assemble_effective(&setup.spec, mapping, &setup.mass, &setup.ordering, mode)
            .map_err(Error::at(Stage::Potential))?;
        let masses: Vec<f64> = table.u.iter().map(|&u| setup.mass.value(u)).collect();
        let oracle = FdProblem::new(table.u.clone(), masses, table.total.clone())
            .and_then(|p| solve_problem(&p, k))
            .map_err(Error::at(Stage::Oracle))?;
        let score = states
            .iter()
            .zip(&oracle.energies)
            .map(|(s, e)| (s.energy - e).abs() / s.energy.abs())
            .fold(0.0_f64, f64::max);
        mode_scores.push(ModeScore {
            mode,
            max_rel_error: score,
        });
        if best.as_ref().is_none_or(|(_, s, _)| score < *s) {
            best = Some((mode, score, oracle));
        }
    }
    let (mode, _, oracle) = best.expect("at least one mode candidate");

    let mut variant_scores = Vec::new();
    let mut chosen: Option<(Variant, f64, usize)> = None;
    for (idx, (variant, waves, _)) in attempt.waves.iter().enumerate() {
        let overlaps = waves
            .iter()
            .zip(&oracle.vectors)
            .map(|(w, v)| overlap(&oracle.u, w.psi_bar(), v))
            .collect::<Result<Vec<_>>>()
            .map_err(Error::at(Stage::Oracle))?;
        let ground = overlaps[0];
        variant_scores.push(VariantScore {
            variant: *variant,
            ground_overlap: ground,
            min_overlap: overlaps.iter().copied().fold(1.0, f64::min),
        });
        if chosen.is_none_or(|(_, g, _)| ground > g) {
            chosen = Some((*variant, ground, idx));
        }
    }
    let (variant, _, widx) = chosen.expect("at least one variant candidate");
    let (_, waves, tails) = &attempt.waves[widx];

    let gram = gram_matrix(waves).map_err(Error::at(Stage::Wavefunction))?;
    let oracle_gram: Vec<Vec<f64>> = oracle
        .vectors
        .iter()
        .map(|f| {
            oracle
                .vectors
                .iter()
                .map(|g| simpson(&oracle.u, &f.iter().zip(g).map(|(x, y)| x * y).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()
        .map_err(Error::at(Stage::Oracle))?;

    let mut rows = Vec::with_capacity(k);
    let mut comparisons = Vec::with_capacity(k);
    for (i, (s, w)) in states.iter().zip(waves).enumerate() {
        let v = &oracle.vectors[i];
        let e = oracle.energies[i];
        let ov = overlap(&oracle.u, w.psi_bar(), v).map_err(Error::at(Stage::Oracle))?;
        let sign = if dot(w.psi_bar(), v) < 0.0 { -1.0 } else { 1.0 };
        let aligned: Vec<f64> = v.iter().map(|x| sign * x).collect();
        let orth = gram[i]
            .iter()
            .enumerate()
            .map(|(j, g)| (g - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0_f64, f64::max);
        rows.push(ReportRow {
            n: s.n,
            closed_form_energy: s.energy,
            oracle_energy: e,
            abs_error: (s.energy - e).abs(),
            rel_error: (s.energy - e).abs() / s.energy.abs(),
            overlap: ov,
            orthonormality: orth,
            nodes: w.node_count(),
            oracle_nodes: sign_changes(&aligned),
        });
        comparisons.push(StateComparison {
            n: s.n,
            u: w.u().to_vec(),
            psi_bar: w.psi_bar().to_vec(),
            chi: w.chi().to_vec(),
            oracle: aligned,
        });
    }

    let count = |pass: &dyn Fn(usize) -> bool, len: usize| (0..len).filter(|&i| pass(i)).count();
    let unique_mode = count(
        &|i| mode_scores[i].max_rel_error < CALIBRATION_ENERGY_TOL,
        mode_scores.len(),
    ) == 1;
    let unique_variant = count(
        &|i| variant_scores[i].ground_overlap > CALIBRATION_OVERLAP_TOL,
        variant_scores.len(),
    ) == 1;

    let report = SpectralReport {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        spec: setup.spec,
        mass: setup.mass.clone(),
        ordering: setup.ordering,
        mode,
        variant,
        n_max: setup.n_max,
        grid: GridInfo {
            domain: mapping.domain(),
            requested_domain: setup.domain,
            points: mapping.len(),
            spacing: h,
            padding_steps,
            tails: *tails,
            mapping_closed_form: mapping.is_closed_form(),
            mapping_residual: mapping.max_residual(&setup.spec, &setup.mass),
        },
        calibration: Calibration {
            requested_mode: setup.mode,
            requested_variant: setup.variant,
            modes: mode_scores,
            variants: variant_scores,
            mode,
            variant,
            unique_mode,
            unique_variant,
        },
        rows,
        no_root,
        oracle_orthonormality: crate::wavefunc::orthonormality_residual(&oracle_gram),
    };
    Ok(Validation {
        report,
        states: comparisons,
    })
}

/// Sign changes ignoring samples below 1e-9 of the peak.
fn sign_changes(v: &[f64]) -> usize {
    let floor = 1e-9 * v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut last = 0.0_f64;
    let mut count = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && (x < 0.0) != (last < 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}
