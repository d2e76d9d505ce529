//! End-to-end tests of the `cefoliator` binary: artifact layout,
//! manifest coverage, byte-identical reruns, and exit codes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cefoliator")
}

fn run(task: &str, config: &Path, out: &Path) -> Output {
    Command::new(bin())
        .arg(task)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawning cefoliator")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

const SOLVE_CONFIG: &str = r#"{
  "schema": "cefoliator/1",
  "data": {"schwarzschild": {"mass": 1.0}},
  "task": {"solve": {"sigma": 20.0}},
  "numerics": {"lmax": 8}
}"#;

#[test]
fn solve_run_is_bit_identical_and_fully_manifested() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "run.json", SOLVE_CONFIG);
    let out1 = tmp.path().join("run1");
    let out2 = tmp.path().join("run2");

    let r1 = run("solve", &config, &out1);
    assert!(
        r1.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&r1.stdout),
        String::from_utf8_lossy(&r1.stderr)
    );
    let r2 = run("solve", &config, &out2);
    assert!(r2.status.success());

    let c1 = dir_contents(&out1);
    let c2 = dir_contents(&out2);
    assert_eq!(
        c1.keys().collect::<Vec<_>>(),
        c2.keys().collect::<Vec<_>>()
    );
    for (name, bytes) in &c1 {
        assert_eq!(bytes, &c2[name], "artifact {name} differs between reruns");
    }

    // Expected artifacts, all listed in the manifest.
    for name in [
        "surface.cesurf",
        "trace.csv",
        "report.json",
        "plot_newton_residual.dat",
        "manifest.txt",
    ] {
        assert!(c1.contains_key(name), "missing {name}");
    }
    let manifest = String::from_utf8(c1["manifest.txt"].clone()).unwrap();
    let listed: Vec<&str> = manifest
        .lines()
        .map(|l| l.split_once("  ").unwrap().1)
        .collect();
    let on_disk: Vec<&String> = c1.keys().filter(|n| *n != "manifest.txt").collect();
    assert_eq!(listed.len(), on_disk.len());
    for (a, b) in listed.iter().zip(on_disk) {
        assert_eq!(*a, b.as_str());
    }

    // CSV conventions: '.' decimal separator, '\n' line endings.
    let trace = String::from_utf8(c1["trace.csv"].clone()).unwrap();
    assert!(!trace.contains('\r'));
    assert!(trace.contains('.'));
}

#[test]
fn trace_csv_fields_are_comma_separated_with_header() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "run.json", SOLVE_CONFIG);
    let out = tmp.path().join("run");
    assert!(run("solve", &config, &out).status.success());
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "b,sigma,iters,residual,mH,zx,zy,zz,sup_Aring,min_eig,min_lapse"
    );
    assert!(lines.next().unwrap().split(',').count() == 11);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    // Unknown key.
    let bad = write_config(
        tmp.path(),
        "bad1.json",
        r#"{"schema": "cefoliator/1", "data": {"flat": {}},
            "task": {"solve": {"sigma": 10.0, "typo": 1}}}"#,
    );
    let r = run("solve", &bad, &out);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));

    // Task mismatch between CLI and config.
    let cfg = write_config(tmp.path(), "bad2.json", SOLVE_CONFIG);
    let r = run("foliate", &cfg, &out);
    assert_eq!(r.status.code(), Some(2));

    // Missing output directory everywhere.
    let cfg = write_config(tmp.path(), "bad3.json", SOLVE_CONFIG);
    let r = Command::new(bin())
        .arg("solve")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2));

    // Nothing was produced by the failed runs.
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn missing_config_file_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        "solve",
        &tmp.path().join("does_not_exist.json"),
        &tmp.path().join("out"),
    );
    assert_eq!(r.status.code(), Some(4));
}

#[test]
fn solver_failure_exits_3_and_keeps_partial_trace() {
    let tmp = tempfile::tempdir().unwrap();
    // One Newton step is not enough to converge from a far guess: the
    // CMC stage of the foliation fails, after zero accepted records...
    // so instead drive a two-leaf foliation where the first leaf
    // converges and the second cannot (max_newton too small for the
    // warm start *and* the fallback), leaving a partial trace.
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
  "schema": "cefoliator/1",
  "data": {"schwarzschild": {"mass": 1.0}},
  "task": {"solve": {"sigma": 20.0, "guess": {"radius": 14.0}, "continuation": false}},
  "numerics": {"lmax": 8, "max_newton": 2}
}"#,
    );
    let out = tmp.path().join("out");
    let r = run("solve", &cfg, &out);
    assert_eq!(
        r.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
    // The run directory still carries a manifest (possibly empty of
    // artifacts when nothing converged).
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn foliate_failure_on_grid_data_retains_partial_trace() {
    use cefoliator_core::initialdata::{Flat, GridDataSet};

    let tmp = tempfile::tempdir().unwrap();
    // Flat data sampled on a box whose interpolation region covers the
    // first leaf but not the second: the sweep fails with a domain
    // error after the first leaf's records were accepted.
    let grid = GridDataSet::sample_from(&Flat::new(), [-15.0, -15.0, -15.0], [3.75; 3], [9, 9, 9])
        .unwrap();
    grid.write(&tmp.path().join("flat.cegrid")).unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
  "schema": "cefoliator/1",
  "data": {"grid-file": {"path": "flat.cegrid"}},
  "task": {"foliate": {"sign": 1.0, "sigmas": [10.0, 100.0]}},
  "numerics": {"lmax": 6}
}"#,
    );
    let out = tmp.path().join("out");
    let r = run("foliate", &cfg, &out);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(
        trace.lines().count() >= 2,
        "partial trace should contain the converged first leaf:\n{trace}"
    );
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn audit_task_reports_flat_data_as_exactly_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
  "schema": "cefoliator/1",
  "data": {"flat": {}},
  "task": {"audit": {"radii": [10.0, 20.0, 40.0]}},
  "numerics": {"lmax": 6}
}"#,
    );
    let out = tmp.path().join("out");
    let r = run("audit", &cfg, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    for (_, sup) in v["column_sup"].as_object().unwrap() {
        assert_eq!(sup.as_f64().unwrap(), 0.0);
    }
    // All-zero defect columns admit no log-log plot variant.
    assert!(out.join("plot_metric_defect.dat").exists());
    assert!(!out.join("plot_metric_defect_loglog.dat").exists());
}

#[test]
fn adm_task_emits_series_and_limits() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
  "schema": "cefoliator/1",
  "data": {"bowen-york": {"mass": 1.0, "momentum": [0.01, 0.0, 0.0]}},
  "task": {"adm": {"radii": [100.0, 200.0, 400.0], "eps": 1.0}},
  "numerics": {"lmax": 8}
}"#,
    );
    let out = tmp.path().join("out");
    let r = run("adm", &cfg, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let adm = fs::read_to_string(out.join("adm.csv")).unwrap();
    assert!(adm.starts_with("radius,quantity,index,value\n"));
    assert!(adm.contains("adm_momentum"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let p1 = report["momentum"]["value"][0].as_f64().unwrap();
    assert!((p1 + 0.01).abs() <= 1e-10, "momentum limit {p1}");
    let dev = report["momentum_limit_max_rel_deviation"].as_f64().unwrap();
    assert!(dev <= 1e-10, "deviation {dev}");
    assert!(out.join("plot_hawking.dat").exists());
}

#[test]
fn unique_task_flags_inadmissible_guesses() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{
  "schema": "cefoliator/1",
  "data": {"schwarzschild": {"mass": 1.0}},
  "task": {"unique": {"sigma": 20.0, "sign": 1.0, "guesses": [
    {"radius": 18.0},
    {"radius": 19.5, "center": [0.2, 0.0, 0.0]},
    {"radius": 19.0, "center": [12.0, 0.0, 0.0]}
  ]}},
  "numerics": {"lmax": 8}
}"#,
    );
    let out = tmp.path().join("out");
    let r = run("unique", &cfg, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let admissible = report["admissible"].as_array().unwrap();
    assert_eq!(admissible.len(), 2);
    let rejected = &report["inadmissible"][0];
    assert_eq!(rejected["index"].as_u64(), Some(2));
    assert!(rejected["reason"].as_str().unwrap().contains("center offset"));
    let sup = report["pairwise_sup"].as_f64().unwrap();
    assert!(sup <= 1e-8, "pairwise sup {sup}");
    assert!(out.join("candidate_000.cesurf").exists());
    assert!(out.join("candidate_001.cesurf").exists());
    assert!(!out.join("candidate_002.cesurf").exists());
}
