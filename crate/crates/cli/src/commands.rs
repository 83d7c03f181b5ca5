use natanzon_pdm::liealg::{
    scale_identity_residual, scaled_vs_plain_residual, Generator, OperatorRealization, Relation, StandardMapping,
    TestFunctionSet,
};
use natanzon_pdm::mapping::best_mapping;
use natanzon_pdm::oracle::{validate, validate_full, Selection, SpectralReport, CALIBRATED_MODE, CALIBRATED_VARIANT};
use natanzon_pdm::potential::assemble_effective;
use natanzon_pdm::spectrum::solve_levels;
use natanzon_pdm::wavefunc::build_wavefunction;
use natanzon_pdm::{Error, Level, MappingRequest, MappingSolution, PotentialMode, Stage, Variant};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Thresholds};
use crate::error::{CliError, CliResult};
use crate::output::{num, OutDir, Table};

fn request(cfg: &RunConfig) -> MappingRequest {
    let mut req = MappingRequest::new(cfg.domain, cfg.points).with_branch(cfg.branch);
    req.u0 = cfg.u0;
    req.xi0 = cfg.xi0;
    req
}

fn mapping(cfg: &RunConfig) -> CliResult<MappingSolution> {
    Ok(best_mapping(&cfg.spec, cfg.mass(), &request(cfg)).map_err(stage(Stage::Mapping))?)
}

fn stage(stage: Stage) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage,
            source: Box::new(e),
        },
    }
}

/// Turns `"auto"` into concrete choices. With a constant mass every mode
/// gives the same operator and calibration has nothing to decide.
fn resolve(cfg: &RunConfig) -> CliResult<(PotentialMode, Variant)> {
    match (cfg.mode, cfg.variant) {
        (Selection::Fixed(m), Selection::Fixed(v)) => Ok((m, v)),
        (mode, variant) if cfg.mass().is_constant() && variant != Selection::Auto => Ok((
            match mode {
                Selection::Fixed(m) => m,
                Selection::Auto => CALIBRATED_MODE,
            },
            match variant {
                Selection::Fixed(v) => v,
                Selection::Auto => CALIBRATED_VARIANT,
            },
        )),
        _ => {
            let r = validate(&cfg.setup())?;
            Ok((r.mode, r.variant))
        }
    }
}

fn resolved_config(cfg: &RunConfig, mode: PotentialMode, variant: Variant) -> RunConfig {
    RunConfig {
        mode: Selection::Fixed(mode),
        variant: Selection::Fixed(variant),
        ..cfg.clone()
    }
}

pub fn potential(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let mode = match cfg.mode {
        Selection::Fixed(m) => m,
        Selection::Auto if cfg.mass().is_constant() => CALIBRATED_MODE,
        Selection::Auto => resolve(cfg)?.0,
    };
    let map = mapping(cfg)?;
    let t = assemble_effective(&cfg.spec, &map, cfg.mass(), &cfg.ordering, mode).map_err(stage(Stage::Potential))?;
    let mut table = Table::new(["u", "xi", "V", "Vm", "Um", "Ueff", "Vtotal"]);
    for i in 0..t.u.len() {
        table.push([t.u[i], t.xi[i], t.v[i], t.vm[i], t.um[i], t.ueff[i], t.total[i]].map(num).to_vec());
    }
    out.write_csv("potential.csv", &table)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn spectrum(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let levels = solve_levels(&cfg.spec, cfg.n_max).map_err(stage(Stage::Spectrum))?;
    let mut table = Table::new([
        "n", "status", "E", "a", "b", "q0", "beta", "c", "j0", "res_beta", "res_linear", "res_c", "res_j0",
    ]);
    for level in &levels {
        let mut row = vec![level.n().to_string()];
        match level.bound() {
            Some(s) => {
                let r = s.residuals(&cfg.spec);
                row.push("bound".into());
                row.extend(
                    [s.energy, s.a, s.b, s.q0(), s.beta(), s.c(), s.j0(), r.beta, r.linear, r.c, r.j0_relation].map(num),
                );
            }
            None => {
                row.push("no-root".into());
                row.extend(std::iter::repeat_n(String::new(), 11));
            }
        }
        table.push(row);
    }
    out.write_csv("levels.csv", &table)
}

pub fn wavefunctions(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let (_, variant) = resolve(cfg)?;
    let map = mapping(cfg)?;
    let levels = solve_levels(&cfg.spec, cfg.n_max).map_err(stage(Stage::Spectrum))?;
    let states = levels
        .iter()
        .filter_map(Level::bound)
        .map(|s| build_wavefunction(s, &cfg.spec, &map, cfg.mass(), variant).map(|w| w.normalized()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(stage(Stage::Wavefunction))?;
    if states.is_empty() {
        return Err(stage(Stage::Spectrum)(Error::Domain(format!("no bound state with n <= {}", cfg.n_max))).into());
    }
    let mut header = vec!["u".to_string(), "xi".into(), "m".into()];
    for w in &states {
        header.push(format!("psi_bar_{}", w.state().n));
        header.push(format!("chi_{}", w.state().n));
    }
    let mut table = Table::new(header);
    for (i, (&u, &xi)) in map.u().iter().zip(map.xi()).enumerate() {
        let mut row = vec![num(u), num(xi), num(cfg.mass().value(u))];
        for w in &states {
            row.push(num(w.psi_bar()[i]));
            row.push(num(w.chi()[i]));
        }
        table.push(row);
    }
    out.write_csv("wavefunctions.csv", &table)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

fn checks(report: &SpectralReport, t: &Thresholds) -> Vec<Check> {
    let worst_gram = report
        .rows
        .iter()
        .map(|r| r.orthonormality)
        .fold(report.oracle_orthonormality, f64::max);
    vec![
        Check {
            name: "max_rel_error",
            value: report.max_rel_error(),
            bound: t.max_rel_error,
            passed: report.max_rel_error() < t.max_rel_error,
        },
        Check {
            name: "min_overlap",
            value: report.min_overlap(),
            bound: t.min_overlap,
            passed: report.min_overlap() > t.min_overlap,
        },
        Check {
            name: "max_orthonormality",
            value: worst_gram,
            bound: t.max_orthonormality,
            passed: worst_gram < t.max_orthonormality,
        },
    ]
}

/// Contents of `report.json`.
#[derive(Serialize)]
struct VerifyReport<'a> {
    #[serde(flatten)]
    report: &'a SpectralReport,
    config: RunConfig,
    checks: Vec<Check>,
    passed: bool,
}

pub fn verify(cfg: &RunConfig, out: &mut OutDir, strict: bool) -> CliResult<()> {
    let v = validate_full(&cfg.setup())?;
    let checks = checks(&v.report, &cfg.thresholds);
    let passed = checks.iter().all(|c| c.passed);
    for s in &v.states {
        let mut table = Table::new(["u", "psi_bar", "chi", "oracle_vector"]);
        for i in 0..s.u.len() {
            table.push([s.u[i], s.psi_bar[i], s.chi[i], s.oracle[i]].map(num).to_vec());
        }
        out.write_csv(&format!("states_{}.csv", s.n), &table)?;
    }
    out.write_json(
        "report.json",
        &VerifyReport {
            report: &v.report,
            config: resolved_config(cfg, v.report.mode, v.report.variant),
            checks: checks.clone(),
            passed,
        },
    )?;
    if strict && !passed {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} = {:e} (bound {:e})", c.name, c.value, c.bound))
            .collect();
        return Err(CliError::Strict(failed.join(", ")));
    }
    Ok(())
}

struct AlgebraRow {
    realization: String,
    casimir: f64,
    check: String,
    residual: f64,
    /// `true` when the residual must stay below the bound.
    below: bool,
    bound: f64,
}

impl AlgebraRow {
    fn passed(&self) -> bool {
        if self.below {
            self.residual < self.bound
        } else {
            self.residual > self.bound
        }
    }
}

pub fn algebra_check(cfg: &RunConfig, out: &mut OutDir, strict: bool) -> CliResult<()> {
    let alg = &cfg.algebra;
    let mut rows = Vec::new();
    let tests_on = |op: &OperatorRealization| TestFunctionSet::generate(op.u(), alg.test_functions, cfg.seed);
    for map in StandardMapping::ALL {
        let (a, b) = map.domain();
        let mass_fits = !cfg.mass().is_constant() && cfg.mass().validate_on(a, b).is_ok();
        for &c in &alg.casimirs {
            let op = map.realization(alg.points, c)?;
            let tests = tests_on(&op)?;
            let mut push = |realization: String, check: String, residual: f64, below: bool, bound: f64| {
                rows.push(AlgebraRow {
                    realization,
                    casimir: c,
                    check,
                    residual,
                    below,
                    bound,
                })
            };
            for rel in Relation::SO21 {
                push(map.label().into(), rel.label(), rel.residual(&op, &tests)?, true, alg.max_residual);
            }
            let flat = op.clone().with_scale(|_| [1.0, 0.0, 0.0])?;
            push(
                format!("{}+P=1", map.label()),
                "T-J".into(),
                scaled_vs_plain_residual(&flat, &tests)?,
                true,
                1e-12,
            );
            let bad = op.clone().with_perturbed_casimir(Generator::J0, c + alg.control_shift);
            let mut control = f64::INFINITY;
            for rel in Relation::SO21 {
                control = control.min(rel.residual(&bad, &tests)?);
            }
            push(format!("{}+perturbed", map.label()), "negative-control".into(), control, false, alg.min_control);
            if mass_fits {
                let scaled = op.with_mass(cfg.mass())?;
                for rel in Relation::SO21.map(Relation::scaled) {
                    push(
                        format!("{}+P=m", map.label()),
                        rel.label(),
                        rel.residual(&scaled, &tests)?,
                        true,
                        alg.max_residual,
                    );
                }
                if map == StandardMapping::Identity {
                    push(
                        format!("{}+P=m", map.label()),
                        format!("scale-identity(theta={},order={})", alg.theta, alg.order),
                        scale_identity_residual(&scaled, alg.theta, alg.order, &tests)?,
                        true,
                        1e-7,
                    );
                }
            }
        }
    }
    let mut table = Table::new(["realization", "casimir", "check", "residual", "comparison", "bound", "status"]);
    for r in &rows {
        table.push(vec![
            r.realization.clone(),
            num(r.casimir),
            r.check.clone(),
            num(r.residual),
            if r.below { "lt" } else { "gt" }.into(),
            num(r.bound),
            if r.passed() { "pass" } else { "fail" }.into(),
        ]);
    }
    out.write_csv("algebra.csv", &table)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} {} ({:e})", r.realization, r.check, r.residual))
        .collect();
    if strict && !failed.is_empty() {
        return Err(CliError::Strict(failed.join(", ")));
    }
    Ok(())
}

/// Worker count for `sweep`: `NATANZON_THREADS` if set, else rayon's default.
pub fn sweep_threads() -> CliResult<Option<usize>> {
    match std::env::var("NATANZON_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::config(format!("NATANZON_THREADS: {e}"))),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("NATANZON_THREADS: expected a positive integer, got {s:?}"))),
        },
    }
}

enum PointOutcome {
    Levels(Vec<Level>, Option<SpectralReport>),
    Failed(Error),
}

fn sweep_point(cfg: &RunConfig, oracle: bool) -> PointOutcome {
    let levels = match solve_levels(&cfg.spec, cfg.n_max) {
        Ok(l) => l,
        Err(e) => return PointOutcome::Failed(stage(Stage::Spectrum)(e)),
    };
    if !oracle {
        return PointOutcome::Levels(levels, None);
    }
    match validate(&cfg.setup()) {
        Ok(r) => PointOutcome::Levels(levels, Some(r)),
        Err(e) => PointOutcome::Failed(e),
    }
}

pub fn sweep(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let Some(sweep) = &cfg.sweep else {
        return Err(CliError::config("sweep: the config has no sweep section"));
    };
    let points: Vec<RunConfig> = sweep
        .values
        .iter()
        .map(|&v| Ok(cfg.with_spec(sweep.parameter.apply(&cfg.spec, v)?)))
        .collect::<Result<_, Error>>()
        .map_err(CliError::config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = sweep_threads()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(CliError::config)?;
    let outcomes: Vec<PointOutcome> =
        pool.install(|| points.par_iter().map(|p| sweep_point(p, sweep.oracle)).collect());

    let mut table = Table::new([
        sweep.parameter.label(),
        "n",
        "status",
        "E",
        "a",
        "b",
        "oracle_E",
        "rel_error",
        "overlap",
        "message",
    ]);
    let mut first_error = None;
    for (&value, outcome) in sweep.values.iter().zip(outcomes) {
        match outcome {
            PointOutcome::Levels(levels, report) => {
                for level in &levels {
                    let row = report.as_ref().and_then(|r| r.rows.iter().find(|row| row.n == level.n()));
                    let s = level.bound();
                    table.push(vec![
                        num(value),
                        level.n().to_string(),
                        if s.is_some() { "bound" } else { "no-root" }.into(),
                        opt(s.map(|s| s.energy)),
                        opt(s.map(|s| s.a)),
                        opt(s.map(|s| s.b)),
                        opt(row.map(|r| r.oracle_energy)),
                        opt(row.map(|r| r.rel_error)),
                        opt(row.map(|r| r.overlap)),
                        String::new(),
                    ]);
                }
            }
            PointOutcome::Failed(e) => {
                let mut row = vec![num(value), String::new(), "error".into()];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e.to_string());
                table.push(row);
                first_error.get_or_insert(e);
            }
        }
    }
    out.write_csv("sweep.csv", &table)?;
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
