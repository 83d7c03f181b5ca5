use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const OSCILLATOR: [f64; 6] = [0.0, 4.0, 0.0, 4.0, 0.0, 0.0];

fn spec(p: [f64; 6]) -> Value {
    json!({
        "lambda0": p[0], "lambda1": p[1], "lambda2": p[2],
        "sigma_beta": p[3], "sigma_q0": p[4], "sigma_c": p[5],
    })
}

fn oscillator_config() -> Value {
    json!({
        "spec": spec(OSCILLATOR),
        "domain": [1e-6, 14.0],
        "points": 2001,
        "u0": 1.0,
        "xi0": 0.5,
    })
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Run {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, cfg: &Value) -> PathBuf {
        let p = self.path("config.json");
        std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
        p
    }

    fn exec(&self, cmd: &str, cfg: &Value, extra: &[&str], env: &[(&str, &str)]) -> Output {
        let config = self.config(cfg);
        let mut c = Command::new(env!("CARGO_BIN_EXE_natanzon-pdm"));
        c.arg(cmd).arg("--config").arg(&config).arg("--out").arg(self.path("out")).args(extra);
        for (k, v) in env {
            c.env(k, v);
        }
        c.output().unwrap()
    }

    fn ok(&self, cmd: &str, cfg: &Value) {
        let out = self.exec(cmd, cfg, &[], &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path("out").join(name)).unwrap()
    }

    fn csv(&self, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
        let text = self.read(name);
        assert!(!text.contains('\r'));
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().unwrap().iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
            .collect();
        (header, rows)
    }
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn potential_reduces_to_the_oscillator() {
    let run = Run::new();
    run.ok("potential", &oscillator_config());
    let (h, rows) = run.csv("potential.csv");
    assert_eq!(h, ["u", "xi", "V", "Vm", "Um", "Ueff", "Vtotal"]);
    assert_eq!(rows.len(), 2001);
    for r in &rows {
        let u = f(&r[0]);
        let exact = 0.5 * u * u + 0.375 / (u * u);
        assert!((f(&r[2]) - exact).abs() <= 1e-8 * exact.max(1.0), "u={u}");
        for c in 3..6 {
            assert_eq!(f(&r[c]), 0.0);
        }
        // Seventeen significant digits.
        assert_eq!(r[2].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }
}

#[test]
fn spectrum_tables() {
    let run = Run::new();
    run.ok("spectrum", &oscillator_config());
    let (h, rows) = run.csv("levels.csv");
    let e: Vec<f64> = rows.iter().map(|r| f(&r[col(&h, "E")])).collect();
    assert_eq!(e.len(), 4);
    for (n, e) in e.iter().enumerate() {
        assert!((e - (2 * n + 2) as f64).abs() < 1e-12);
    }

    let mut cfg = oscillator_config();
    cfg["spec"] = spec([8.0, 0.0, 0.0, 4.0, -43.6, 7.0]);
    cfg["n_max"] = json!(7);
    run.ok("spectrum", &cfg);
    let (h, rows) = run.csv("levels.csv");
    assert_eq!(rows.len(), 8);
    let status: Vec<&str> = rows.iter().map(|r| r[col(&h, "status")].as_str()).collect();
    assert_eq!(status, ["bound", "bound", "bound", "bound", "bound", "no-root", "no-root", "no-root"]);

    cfg["spec"] = spec([0.0, 0.0, 1.0, 0.0, -4.0, 8.0]);
    cfg["n_max"] = json!(5);
    run.ok("spectrum", &cfg);
    let (h, rows) = run.csv("levels.csv");
    let e: Vec<f64> = rows.iter().map(|r| f(&r[col(&h, "E")])).collect();
    assert!(e.iter().all(|&e| e < 0.0));
    assert!(e.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn config_errors_exit_with_two() {
    let run = Run::new();
    let mut cfg = oscillator_config();
    cfg["spec"].as_object_mut().unwrap().remove("lambda1");
    let out = run.exec("potential", &cfg, &[], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda1"));

    let mut cfg = oscillator_config();
    cfg["points"] = json!(10);
    assert_eq!(run.exec("verify", &cfg, &[], &[]).status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_natanzon-pdm"))
        .args(["spectrum", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let run = Run::new();
    let mut cfg = oscillator_config();
    // A repulsive numerator has no bound states.
    cfg["spec"] = spec([0.0, 4.0, 0.0, -4.0, 0.0, 0.0]);
    let out = run.exec("verify", &cfg, &[], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spectrum"));
}

#[test]
fn verify_writes_a_traceable_deterministic_report() {
    let run = Run::new();
    let mut cfg = oscillator_config();
    cfg["points"] = json!(8001);
    run.ok("verify", &cfg);
    let first = run.read("report.json");
    let states = run.read("states_2.csv");
    let report: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["mode"], "V+Ueff");
    assert_eq!(report["config"]["variant"], "scaled");
    assert_eq!(report["config"]["points"], 8001);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r["abs_error"].as_f64().unwrap() < 1e-4);
    }
    let (h, _) = run.csv("states_0.csv");
    assert_eq!(h, ["u", "psi_bar", "chi", "oracle_vector"]);

    run.ok("verify", &cfg);
    assert_eq!(run.read("report.json"), first);
    assert_eq!(run.read("states_2.csv"), states);
    let leftovers: Vec<_> = std::fs::read_dir(run.path("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| !(n.ends_with(".csv") || n.ends_with(".json")))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn verify_records_the_calibration_and_enforces_strict_mode() {
    let run = Run::new();
    let mut cfg = oscillator_config();
    cfg["mass"] = json!({"family": "rational", "kappa": 0.1});
    cfg["domain"] = json!([1e-6, 25.0]);
    cfg["points"] = json!(4001);
    run.ok("verify", &cfg);
    let report: Value = serde_json::from_str(&run.read("report.json")).unwrap();
    assert_eq!(report["mode"], "V+Ueff");
    assert_eq!(report["variant"], "scaled");
    assert_eq!(report["calibration"]["requested_mode"], "auto");
    assert_eq!(report["calibration"]["modes"].as_array().unwrap().len(), 3);
    assert_eq!(report["calibration"]["unique_mode"], true);

    cfg["mode"] = json!("V");
    cfg["variant"] = json!("scaled");
    let out = run.exec("verify", &cfg, &["--strict"], &[]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&run.read("report.json")).unwrap();
    assert_eq!(report["passed"], false);
    // Without --strict the same run succeeds.
    assert_eq!(run.exec("verify", &cfg, &[], &[]).status.code(), Some(0));
}

#[test]
fn algebra_check_rows() {
    let run = Run::new();
    let mut cfg = oscillator_config();
    cfg["mass"] = json!({"family": "rational", "kappa": 0.1});
    let out = run.exec("algebra-check", &cfg, &["--strict"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = run.csv("algebra.csv");
    let (check, res, status, real) = (col(&h, "check"), col(&h, "residual"), col(&h, "status"), col(&h, "realization"));
    assert!(rows.iter().all(|r| r[status] == "pass"));
    let relations = rows.iter().filter(|r| r[check].starts_with("[J")).count();
    assert_eq!(relations, 3 * 2 * 3);
    for r in rows.iter().filter(|r| r[check].starts_with("[J")) {
        assert!(f(&r[res]) < 1e-6);
    }
    let unit: Vec<_> = rows.iter().filter(|r| r[real].ends_with("+P=1")).collect();
    assert_eq!(unit.len(), 6);
    assert!(unit.iter().all(|r| f(&r[res]) == 0.0));
    let control: Vec<_> = rows.iter().filter(|r| r[check] == "negative-control").collect();
    assert!(!control.is_empty() && control.iter().all(|r| f(&r[res]) > 1e-2));
    assert!(rows.iter().any(|r| r[check].starts_with("scale-identity")));
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let run = Run::new();
    let mut cfg = oscillator_config();
    cfg["sweep"] = json!({"parameter": "sigma_q0", "values": [-1.0, -0.5, 0.0, 0.5, 1.0], "oracle": true});
    let one = run.exec("sweep", &cfg, &[], &[("NATANZON_THREADS", "1")]);
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    let a = run.read("sweep.csv");
    let four = run.exec("sweep", &cfg, &[], &[("NATANZON_THREADS", "4")]);
    assert!(four.status.success());
    assert_eq!(run.read("sweep.csv"), a);

    let (h, rows) = run.csv("sweep.csv");
    assert_eq!(h[0], "sigma_q0");
    assert_eq!(rows.len(), 5 * 4);
    for r in &rows {
        assert!(f(&r[col(&h, "rel_error")]) < 1e-3);
    }

    let bad = run.exec("sweep", &cfg, &[], &[("NATANZON_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
    cfg.as_object_mut().unwrap().remove("sweep");
    assert_eq!(run.exec("sweep", &cfg, &[], &[]).status.code(), Some(2));
}

#[test]
fn wavefunctions_with_a_tabulated_mass_file() {
    let run = Run::new();
    let mut table = String::from("u,m\n");
    for i in 0..=400 {
        let u = -0.5 + 15.0 * i as f64 / 400.0;
        table.push_str(&format!("{u},{}\n", 1.0 / (1.0 + 0.1 * u * u)));
    }
    std::fs::write(run.path("mass.csv"), table).unwrap();
    let mut cfg = oscillator_config();
    cfg["mass"] = json!({"family": "tabulated", "file": "mass.csv"});
    cfg["mode"] = json!("V+Ueff");
    cfg["variant"] = json!("scaled");
    run.ok("wavefunctions", &cfg);
    let (h, rows) = run.csv("wavefunctions.csv");
    assert_eq!(&h[..5], ["u", "xi", "m", "psi_bar_0", "chi_0"]);
    assert_eq!(h.len(), 3 + 2 * 4);
    // ψ̄ = √m χ
    for r in rows.iter().step_by(97) {
        let (m, p, c) = (f(&r[2]), f(&r[3]), f(&r[4]));
        assert!((p - m.sqrt() * c).abs() <= 1e-14 * p.abs().max(1e-300));
    }

    std::fs::remove_file(run.path("mass.csv")).unwrap();
    assert_eq!(run.exec("wavefunctions", &cfg, &[], &[]).status.code(), Some(2));
}
