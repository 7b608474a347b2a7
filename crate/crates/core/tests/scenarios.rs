use std::path::{Path, PathBuf};
use std::process::Command;

use excitonscope::config::{echo_config, load_config, parse_config, RunConfig, Scenario};
use excitonscope::output::Format;
use excitonscope::scenario::run_scenario;
use serde_json::{json, Value};

const DIMER: &str = r#"{
  "name": "dimer",
  "site_energies": [15000.0, 15000.0],
  "couplings": [[0.0, 150.0], [150.0, 0.0]],
  "onsite_anharmonicity": [-600.0, -600.0],
  "pair_anharmonicity": [[0.0, -25.0], [-25.0, 0.0]],
  "site_dipoles": [[1.0, 0.0, 0.0], [0.6, 0.8, 0.0]]
}"#;

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    std::fs::write(dir.join("dimer.json"), DIMER).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn csv_shape(text: &str) -> (usize, usize) {
    let lines: Vec<&str> = text.lines().collect();
    (lines.len(), lines[0].split(',').count())
}

fn bundled(scenario: Scenario, out: &Path, patch: Value) -> RunConfig {
    let mut v = serde_json::to_value(RunConfig::bundled(scenario)).unwrap();
    if let (Some(obj), Some(p)) = (v.as_object_mut(), patch.as_object()) {
        for (k, x) in p {
            obj.insert(k.clone(), x.clone());
        }
    }
    let mut cfg = parse_config(&v.to_string(), Path::new(".")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

#[test]
fn reference_config_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        "ref.json",
        &json!({
            "scenario": "coincidence",
            "aggregate": "dimer.json",
            "source": {"target": 3},
            "coincidence": {
                "detectors": {"fe": {"sigma_t": 4.8681, "sigma_omega": 10.0},
                              "eg": {"sigma_t": 4.8681, "sigma_omega": 10.0}},
                "tw1": 0.0, "tw2": 100.0
            }
        }),
    );
    let cfg = load_config(&p).unwrap();
    let echoed = dir.path().join("echo.json");
    std::fs::write(&echoed, echo_config(&cfg)).unwrap();
    let again = load_config(&echoed).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(again.coincidence.detectors.eg.sigma_t, 4.8681);
    assert_eq!(again.coincidence.tw2, 100.0);
}

#[test]
fn propagate_emits_one_column_per_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = bundled(
        Scenario::Propagate,
        &out,
        json!({"source": {"target": 7}, "propagate": {"times": [50.0, 100.0, 250.0, 1000.0]}}),
    );
    let m = run_scenario(&cfg, Format::Csv).unwrap();
    let text = read(&out, "snapshots.csv");
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, ["state", "label", "energy_cm", "t=0", "t=50", "t=100", "t=250", "t=1000"]);
    assert_eq!(csv_shape(&text), (106, 8));
    assert_eq!(m.artifacts.last().unwrap(), "manifest.json");
    assert!(read(&out, "snapshots.gp").contains("histogram"));
}

#[test]
fn excite_scan_over_all_targets_is_square() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled(Scenario::ExciteScan, dir.path(), json!({}));
    run_scenario(&cfg, Format::Csv).unwrap();
    assert_eq!(csv_shape(&read(dir.path(), "scan_map.csv")), (106, 106));
    let script = read(dir.path(), "scan_map.gp");
    assert!(script.contains("'scan_map.csv' matrix rowheaders columnheaders"));
    assert!(script.contains("two-exciton state"));
}

#[test]
fn panel_study_emits_six_grids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled(
        Scenario::PanelStudy,
        dir.path(),
        json!({"source": {"target": 7}, "coincidence": {"points": 24}}),
    );
    let m = run_scenario(&cfg, Format::Csv).unwrap();
    let grids: Vec<&String> = m.artifacts.iter().filter(|a| a.ends_with(".csv")).collect();
    assert_eq!(grids.len(), 6);
    for g in grids {
        assert_eq!(csv_shape(&read(dir.path(), g)), (25, 25));
    }
    let meta: Value = serde_json::from_str(&read(dir.path(), "panel_sigma_t_0.5409_meta.json")).unwrap();
    assert_eq!(meta["panel"]["detectors"]["fe"]["sigma_t"], 0.5409);
    assert_eq!(meta["panel"]["detectors"]["eg"]["sigma_t"], 4.8681);
}

#[test]
fn csv_artifacts_do_not_depend_on_thread_count() {
    let root = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 3] {
        let out = root.path().join(format!("t{threads}"));
        let mut cfg = bundled(
            Scenario::Coincidence,
            &out,
            json!({"source": {"target": 12}, "coincidence": {"points": 20}}),
        );
        cfg.threads = Some(threads);
        let m = run_scenario(&cfg, Format::Csv).unwrap();
        assert_eq!(m.threads, threads);
        outputs.push(read(&out, "signal.csv"));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn json_format_writes_tables_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled(Scenario::Excite, dir.path(), json!({"source": {"target": 7}}));
    let m = run_scenario(&cfg, Format::Json).unwrap();
    assert!(m.artifacts.iter().all(|a| !a.ends_with(".csv") && !a.ends_with(".gp")));
    let t: Value = serde_json::from_str(&read(dir.path(), "distribution.json")).unwrap();
    assert_eq!(t["rows"].as_array().unwrap().len(), 105);
}

#[test]
fn no_temporary_files_remain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled(Scenario::ModelInfo, dir.path(), json!({}));
    let m = run_scenario(&cfg, Format::Csv).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut listed = m.artifacts.clone();
    listed.sort();
    assert_eq!(names, listed);
    let header = read(dir.path(), "transport_two.csv");
    assert!(header.starts_with("to\\from,f01,f02"));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_excitonscope"))
        .args(args)
        .env_remove("EXCITONSCOPE_THREADS")
        .output()
        .unwrap()
}

#[test]
fn cli_runs_and_reports_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "c.json", &json!({"aggregate": "dimer.json", "source": {"target": 3}}));
    let out = dir.path().join("run");
    let o = cli(&["excite", "--config", p.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).trim().ends_with("manifest.json"));
    let m: Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(m["threads"], 2);
    assert_eq!(m["config"]["scenario"], "excite");
    assert_eq!(csv_shape(&read(&out, "distribution.csv")), (4, 5));
}

#[test]
fn cli_thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "c.json", &json!({"aggregate": "dimer.json"}));
    let out = dir.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_excitonscope"))
        .args(["model-info", "--config", p.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("EXCITONSCOPE_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    let m: Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(m["threads"], 3);
}

#[test]
fn cli_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        "bad.json",
        &json!({"aggregate": "missing.json", "source": {"tau0": -5.0}}),
    );
    let o = cli(&["excite", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("aggregate") && err.contains("source.tau0"), "{err}");
}

#[test]
fn cli_numerical_failures_exit_with_three() {
    // a target field with an enormous amplitude overflows the populations
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        "c.json",
        &json!({"aggregate": "dimer.json", "source": {"target": 3, "e0": 1e200}}),
    );
    let out = dir.path().join("run");
    let o = cli(&["excite", "--config", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("manifest.json").exists());
}
