//! Python bindings: potential parameters, mass profiles, levels, tables,
//! the finite-difference validation and the algebra residuals.

use natanzon_pdm::liealg::{
    scale_identity_residual, scaled_vs_plain_residual, Generator, Relation, StandardMapping, TestFunctionSet,
    ALGEBRA_POINTS, MAX_SCALE_ORDER, MIN_TEST_FUNCTIONS,
};
use natanzon_pdm::mapping::{best_mapping, TabulatedMass};
use natanzon_pdm::oracle::{validate as run_validation, Selection, ValidationSetup};
use natanzon_pdm::potential::assemble_effective;
use natanzon_pdm::spectrum::{quartic_roots_all, solve_levels as levels};
use natanzon_pdm::wavefunc::build_wavefunction;
use natanzon_pdm::{self as core, MappingRequest, OrderingParams, PotentialMode, Variant};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pynatanzon, NatanzonError, PyRuntimeError);

/// Parameter problems become `ValueError`; anything raised by a pipeline
/// stage becomes `NatanzonError`.
fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidParameter(_) | core::Error::Domain(_) | core::Error::GridTooSmall { .. } => {
            PyValueError::new_err(e.to_string())
        }
        e => NatanzonError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = core::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "ConfluentSpec", module = "pynatanzon", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpec(core::ConfluentSpec);

#[pymethods]
impl PySpec {
    #[new]
    fn new(lambda0: f64, lambda1: f64, lambda2: f64, sigma_beta: f64, sigma_q0: f64, sigma_c: f64) -> PyResult<Self> {
        core::ConfluentSpec::new([lambda0, lambda1, lambda2], sigma_beta, sigma_q0, sigma_c)
            .map(PySpec)
            .map_err(to_py)
    }

    #[getter]
    fn lambdas(&self) -> [f64; 3] {
        self.0.lambdas()
    }

    #[getter]
    fn sigma_beta(&self) -> f64 {
        self.0.sigma_beta()
    }

    #[getter]
    fn sigma_q0(&self) -> f64 {
        self.0.sigma_q0()
    }

    #[getter]
    fn sigma_c(&self) -> f64 {
        self.0.sigma_c()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta()
    }

    fn __repr__(&self) -> String {
        let [l0, l1, l2] = self.0.lambdas();
        format!(
            "ConfluentSpec(lambda0={l0}, lambda1={l1}, lambda2={l2}, sigma_beta={}, sigma_q0={}, sigma_c={})",
            self.0.sigma_beta(),
            self.0.sigma_q0(),
            self.0.sigma_c()
        )
    }
}

#[pyclass(name = "MassProfile", module = "pynatanzon", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMass(core::MassProfile);

#[pymethods]
impl PyMass {
    #[staticmethod]
    #[pyo3(signature = (m0=1.0))]
    fn constant(m0: f64) -> Self {
        PyMass(core::MassProfile::constant(m0))
    }

    #[staticmethod]
    #[pyo3(signature = (kappa, m0=1.0))]
    fn exponential(kappa: f64, m0: f64) -> Self {
        PyMass(core::MassProfile::exponential(m0, kappa))
    }

    #[staticmethod]
    #[pyo3(signature = (kappa, m0=1.0))]
    fn rational(kappa: f64, m0: f64) -> Self {
        PyMass(core::MassProfile::rational(m0, kappa))
    }

    #[staticmethod]
    #[pyo3(signature = (amplitude, kappa, m0=1.0))]
    fn sech2(amplitude: f64, kappa: f64, m0: f64) -> Self {
        PyMass(core::MassProfile::sech2(m0, amplitude, kappa))
    }

    #[staticmethod]
    fn tabulated(u: Vec<f64>, m: Vec<f64>) -> PyResult<Self> {
        TabulatedMass::new(u, m)
            .map(|t| PyMass(core::MassProfile::Tabulated(t)))
            .map_err(to_py)
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.family()
    }

    /// `[m, m', m'']` at `u`.
    fn eval(&self, u: f64) -> [f64; 3] {
        self.0.eval(u)
    }

    fn __repr__(&self) -> String {
        format!("MassProfile({:?})", self.0)
    }
}

#[pyclass(name = "BoundState", module = "pynatanzon", frozen, skip_from_py_object, get_all)]
#[derive(Clone)]
struct PyBoundState {
    n: u32,
    energy: f64,
    a: f64,
    b: f64,
    beta: f64,
    c: f64,
    q0: f64,
    j0: f64,
}

#[pymethods]
impl PyBoundState {
    fn __repr__(&self) -> String {
        format!("BoundState(n={}, energy={}, a={}, b={})", self.n, self.energy, self.a, self.b)
    }
}

impl From<&core::BoundState> for PyBoundState {
    fn from(s: &core::BoundState) -> Self {
        PyBoundState {
            n: s.n,
            energy: s.energy,
            a: s.a,
            b: s.b,
            beta: s.beta(),
            c: s.c(),
            q0: s.q0(),
            j0: s.j0(),
        }
    }
}

fn mass_or_default(mass: Option<PyRef<'_, PyMass>>) -> core::MassProfile {
    mass.map(|m| m.0.clone()).unwrap_or_default()
}

fn request(domain: (f64, f64), points: usize, u0: Option<f64>, xi0: f64) -> MappingRequest {
    let mut req = MappingRequest::new(domain, points);
    req.u0 = u0;
    req.xi0 = xi0;
    req
}

/// Levels `0..=n_max`; `None` marks a quantum number without a root.
#[pyfunction]
fn solve_levels(spec: PyRef<'_, PySpec>, n_max: u32) -> PyResult<Vec<Option<PyBoundState>>> {
    Ok(levels(&spec.0, n_max)
        .map_err(to_py)?
        .iter()
        .map(|l| l.bound().map(PyBoundState::from))
        .collect())
}

/// Real roots of the squared energy condition as `(E, genuine)`.
#[pyfunction]
fn quartic_roots(spec: PyRef<'_, PySpec>, n: u32) -> Vec<(f64, bool)> {
    quartic_roots_all(&spec.0, n)
        .into_iter()
        .map(|r| (r.energy, r.genuine))
        .collect()
}

#[pyfunction]
#[pyo3(signature = (spec, domain, points, mass=None, u0=None, xi0=1.0, mode="V+Ueff", eta=0.0, epsilon=-1.0))]
#[allow(clippy::too_many_arguments)]
fn potential_table<'py>(
    py: Python<'py>,
    spec: PyRef<'_, PySpec>,
    domain: (f64, f64),
    points: usize,
    mass: Option<PyRef<'_, PyMass>>,
    u0: Option<f64>,
    xi0: f64,
    mode: &str,
    eta: f64,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mass = mass_or_default(mass);
    let mode: PotentialMode = parse(mode)?;
    let ordering = OrderingParams::new(eta, epsilon).map_err(to_py)?;
    let map = best_mapping(&spec.0, &mass, &request(domain, points, u0, xi0)).map_err(to_py)?;
    let t = assemble_effective(&spec.0, &map, &mass, &ordering, mode).map_err(to_py)?;
    let d = PyDict::new(py);
    for (k, v) in [
        ("u", t.u),
        ("xi", t.xi),
        ("V", t.v),
        ("Vm", t.vm),
        ("Um", t.um),
        ("Ueff", t.ueff),
        ("Vtotal", t.total),
    ] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// Normalized `ψ̄` and `χ` of the bound levels up to `n_max`.
#[pyfunction]
#[pyo3(signature = (spec, domain, points, mass=None, u0=None, xi0=1.0, n_max=3, variant="scaled"))]
#[allow(clippy::too_many_arguments)]
fn wavefunctions<'py>(
    py: Python<'py>,
    spec: PyRef<'_, PySpec>,
    domain: (f64, f64),
    points: usize,
    mass: Option<PyRef<'_, PyMass>>,
    u0: Option<f64>,
    xi0: f64,
    n_max: u32,
    variant: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mass = mass_or_default(mass);
    let variant: Variant = parse(variant)?;
    let map = best_mapping(&spec.0, &mass, &request(domain, points, u0, xi0)).map_err(to_py)?;
    let (mut n, mut energy, mut psi, mut chi) = (vec![], vec![], vec![], vec![]);
    for s in levels(&spec.0, n_max).map_err(to_py)?.iter().filter_map(core::Level::bound) {
        let w = build_wavefunction(s, &spec.0, &map, &mass, variant)
            .map_err(to_py)?
            .normalized();
        n.push(s.n);
        energy.push(s.energy);
        psi.push(w.psi_bar().to_vec());
        chi.push(w.chi().to_vec());
    }
    let d = PyDict::new(py);
    d.set_item("u", map.u().to_vec())?;
    d.set_item("xi", map.xi().to_vec())?;
    d.set_item("n", n)?;
    d.set_item("energy", energy)?;
    d.set_item("psi_bar", psi)?;
    d.set_item("chi", chi)?;
    Ok(d)
}

/// Runs the finite-difference comparison and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (spec, domain, points, mass=None, u0=None, xi0=1.0, n_max=3, mode="auto", variant="auto"))]
#[allow(clippy::too_many_arguments)]
fn validate<'py>(
    py: Python<'py>,
    spec: PyRef<'_, PySpec>,
    domain: (f64, f64),
    points: usize,
    mass: Option<PyRef<'_, PyMass>>,
    u0: Option<f64>,
    xi0: f64,
    n_max: u32,
    mode: &str,
    variant: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mut setup = ValidationSetup::new(spec.0, mass_or_default(mass), domain, points)
        .with_n_max(n_max)
        .with_mode(parse::<Selection<PotentialMode>>(mode)?)
        .with_variant(parse::<Selection<Variant>>(variant)?);
    setup.u0 = u0;
    setup.xi0 = xi0;
    let report = py.detach(|| run_validation(&setup)).map_err(to_py)?;
    let text = serde_json::to_string(&report).map_err(|e| NatanzonError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Commutator residuals on one standard mapping (`"xi=u"`, `"xi=u^2"` or
/// `"xi=exp(u)"`).
#[pyfunction]
#[pyo3(signature = (casimir, mapping="xi=u", points=ALGEBRA_POINTS, seed=0, mass=None, theta=0.1))]
fn algebra_residuals<'py>(
    py: Python<'py>,
    casimir: f64,
    mapping: &str,
    points: usize,
    seed: u64,
    mass: Option<PyRef<'_, PyMass>>,
    theta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let map = StandardMapping::ALL
        .into_iter()
        .find(|m| m.label() == mapping)
        .ok_or_else(|| PyValueError::new_err(format!("unknown mapping {mapping:?}")))?;
    let op = map.realization(points, casimir).map_err(to_py)?;
    let tests = TestFunctionSet::generate(op.u(), MIN_TEST_FUNCTIONS, seed).map_err(to_py)?;
    let d = PyDict::new(py);
    for rel in Relation::SO21 {
        d.set_item(rel.label(), rel.residual(&op, &tests).map_err(to_py)?)?;
    }
    let flat = op.clone().with_scale(|_| [1.0, 0.0, 0.0]).map_err(to_py)?;
    d.set_item("T-J", scaled_vs_plain_residual(&flat, &tests).map_err(to_py)?)?;
    let bad = op.clone().with_perturbed_casimir(Generator::J0, casimir + 0.5);
    let mut control = f64::INFINITY;
    for rel in Relation::SO21 {
        control = control.min(rel.residual(&bad, &tests).map_err(to_py)?);
    }
    d.set_item("negative-control", control)?;
    let scaled = op.with_mass(&mass_or_default(mass)).map_err(to_py)?;
    d.set_item(
        "scale-identity",
        scale_identity_residual(&scaled, theta, MAX_SCALE_ORDER, &tests).map_err(to_py)?,
    )?;
    Ok(d)
}

#[pymodule]
pub fn pynatanzon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NatanzonError", m.py().get_type::<NatanzonError>())?;
    m.add_class::<PySpec>()?;
    m.add_class::<PyMass>()?;
    m.add_class::<PyBoundState>()?;
    m.add_function(wrap_pyfunction!(solve_levels, m)?)?;
    m.add_function(wrap_pyfunction!(quartic_roots, m)?)?;
    m.add_function(wrap_pyfunction!(potential_table, m)?)?;
    m.add_function(wrap_pyfunction!(wavefunctions, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(algebra_residuals, m)?)?;
    Ok(())
}
