//! Run configuration: JSON on disk, validated in full before any work starts.

use std::path::{Path, PathBuf};

use natanzon_pdm::liealg::{ALGEBRA_POINTS, MAX_SCALE_ORDER, MIN_TEST_FUNCTIONS};
use natanzon_pdm::mapping::TabulatedMass;
use natanzon_pdm::oracle::{Selection, ValidationSetup, MAX_EIGENPAIRS, MIN_FD_POINTS};
use natanzon_pdm::{Branch, ConfluentSpec, MassProfile, OrderingParams, PotentialMode, Variant};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: ConfluentSpec,
    #[serde(default)]
    pub mass: MassConfig,
    #[serde(default)]
    pub ordering: OrderingParams,
    pub domain: (f64, f64),
    #[serde(default = "default_points")]
    pub points: usize,
    /// Point where `ξ(u0) = xi0`; the domain midpoint when absent.
    #[serde(default)]
    pub u0: Option<f64>,
    #[serde(default = "one")]
    pub xi0: f64,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub mode: Selection<PotentialMode>,
    #[serde(default)]
    pub variant: Selection<Variant>,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seeds the test functions of the algebra suite.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub algebra: AlgebraConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_points() -> usize {
    4001
}

fn default_n_max() -> u32 {
    3
}

fn one() -> f64 {
    1.0
}

/// A mass profile given inline, or a two-column `u,m` CSV file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MassConfig {
    Profile(MassProfile),
    File(MassFile),
}

impl Default for MassConfig {
    fn default() -> Self {
        MassConfig::Profile(MassProfile::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassFile {
    pub family: String,
    pub file: PathBuf,
}

impl<'de> Deserialize<'de> for MassConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(d)?;
        if v.get("file").is_some() {
            let f: MassFile = serde_json::from_value(v).map_err(D::Error::custom)?;
            if f.family != "tabulated" {
                return Err(D::Error::custom(format!(
                    "mass: a file is only accepted with family \"tabulated\", got {:?}",
                    f.family
                )));
            }
            Ok(MassConfig::File(f))
        } else {
            serde_json::from_value(v)
                .map(MassConfig::Profile)
                .map_err(|e| D::Error::custom(format!("mass: {e}")))
        }
    }
}

impl MassConfig {
    pub fn profile(&self) -> &MassProfile {
        match self {
            MassConfig::Profile(p) => p,
            MassConfig::File(_) => panic!("mass file not loaded"),
        }
    }
}

/// Bounds checked by `verify --strict`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub max_rel_error: f64,
    pub min_overlap: f64,
    pub max_orthonormality: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            max_rel_error: 1e-3,
            min_overlap: 0.9999,
            max_orthonormality: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgebraConfig {
    pub points: usize,
    pub casimirs: Vec<f64>,
    pub test_functions: usize,
    pub theta: f64,
    pub order: usize,
    /// Casimir offset seen by one generator in the negative control.
    pub control_shift: f64,
    pub max_residual: f64,
    pub min_control: f64,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self {
            points: ALGEBRA_POINTS,
            casimirs: vec![-0.1875, 1.25],
            test_functions: MIN_TEST_FUNCTIONS,
            theta: 0.1,
            order: MAX_SCALE_ORDER,
            control_shift: 0.5,
            max_residual: 1e-6,
            min_control: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Lambda0,
    Lambda1,
    Lambda2,
    SigmaBeta,
    SigmaQ0,
    SigmaC,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::Lambda0 => "lambda0",
            SweepParameter::Lambda1 => "lambda1",
            SweepParameter::Lambda2 => "lambda2",
            SweepParameter::SigmaBeta => "sigma_beta",
            SweepParameter::SigmaQ0 => "sigma_q0",
            SweepParameter::SigmaC => "sigma_c",
        }
    }

    /// `spec` with this parameter replaced by `value`.
    pub fn apply(self, spec: &ConfluentSpec, value: f64) -> natanzon_pdm::Result<ConfluentSpec> {
        let mut l = spec.lambdas();
        let (mut sb, mut sq, mut sc) = (spec.sigma_beta(), spec.sigma_q0(), spec.sigma_c());
        match self {
            SweepParameter::Lambda0 => l[0] = value,
            SweepParameter::Lambda1 => l[1] = value,
            SweepParameter::Lambda2 => l[2] = value,
            SweepParameter::SigmaBeta => sb = value,
            SweepParameter::SigmaQ0 => sq = value,
            SweepParameter::SigmaC => sc = value,
        }
        ConfluentSpec::new(l, sb, sq, sc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Also run the finite-difference comparison at every point.
    #[serde(default)]
    pub oracle: bool,
}

impl RunConfig {
    /// Reads, parses and validates; a tabulated mass file is resolved
    /// relative to the config's directory and inlined.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let MassConfig::File(f) = &cfg.mass {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.mass = MassConfig::Profile(MassProfile::Tabulated(read_mass_table(&base.join(&f.file))?));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without resolving files or validating.
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(CliError::config)
    }

    pub fn mass(&self) -> &MassProfile {
        self.mass.profile()
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let (a, b) = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return bad(format!("domain: need finite a < b, got [{a}, {b}]"));
        }
        if self.points < MIN_FD_POINTS {
            return bad(format!("points: need at least {MIN_FD_POINTS}, got {}", self.points));
        }
        if self.n_max as usize >= MAX_EIGENPAIRS {
            return bad(format!("n_max: must be below {MAX_EIGENPAIRS}, got {}", self.n_max));
        }
        if !(self.xi0 > 0.0 && self.xi0.is_finite()) {
            return bad(format!("xi0: must be positive, got {}", self.xi0));
        }
        if let Some(u0) = self.u0 {
            if !(a..=b).contains(&u0) {
                return bad(format!("u0: {u0} lies outside the domain [{a}, {b}]"));
            }
        }
        if let MassConfig::File(f) = &self.mass {
            return bad(format!("mass: file {} was not loaded", f.file.display()));
        }
        self.mass().validate_on(a, b).map_err(|e| CliError::config(format!("mass: {e}")))?;
        let t = &self.thresholds;
        if !(t.max_rel_error > 0.0 && t.max_orthonormality > 0.0 && (0.0..=1.0).contains(&t.min_overlap)) {
            return bad(format!("thresholds: out of range {t:?}"));
        }
        let alg = &self.algebra;
        if alg.points < 101 || alg.test_functions < MIN_TEST_FUNCTIONS || alg.casimirs.is_empty() {
            return bad(format!(
                "algebra: need points >= 101, test_functions >= {MIN_TEST_FUNCTIONS} and at least one Casimir value"
            ));
        }
        if alg.order > MAX_SCALE_ORDER || !alg.theta.is_finite() || alg.casimirs.iter().any(|c| !c.is_finite()) {
            return bad(format!("algebra: order must be <= {MAX_SCALE_ORDER} and values finite"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep: values is empty".into());
            }
            for &v in &s.values {
                s.parameter
                    .apply(&self.spec, v)
                    .map_err(|e| CliError::config(format!("sweep: {} = {v}: {e}", s.parameter.label())))?;
            }
        }
        Ok(())
    }

    pub fn setup(&self) -> ValidationSetup {
        let mut s = ValidationSetup::new(self.spec, self.mass().clone(), self.domain, self.points)
            .with_n_max(self.n_max)
            .with_mode(self.mode)
            .with_variant(self.variant)
            .with_ordering(self.ordering)
            .with_branch(self.branch);
        s.u0 = self.u0;
        s.xi0 = self.xi0;
        s
    }

    pub fn with_spec(&self, spec: ConfluentSpec) -> Self {
        Self {
            spec,
            ..self.clone()
        }
    }
}

#[derive(Deserialize)]
struct MassRow {
    u: f64,
    m: f64,
}

fn read_mass_table(path: &Path) -> CliResult<TabulatedMass> {
    let err = |e: &dyn std::fmt::Display| CliError::config(format!("mass file {}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| err(&e))?;
    let (mut u, mut m) = (Vec::new(), Vec::new());
    for row in r.deserialize::<MassRow>() {
        let row = row.map_err(|e| err(&e))?;
        u.push(row.u);
        m.push(row.m);
    }
    TabulatedMass::new(u, m).map_err(|e| err(&e))
}
