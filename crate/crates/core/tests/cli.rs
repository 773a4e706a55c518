//! End-to-end tests of the `ionherald` binary: output values, schema
//! conformance, determinism, manifests and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ionherald"))
}

fn run_ok(out_dir: &Path, args: &[&str]) -> Output {
    let output = binary()
        .arg(args[0])
        .args(&args[1..])
        .arg("--out")
        .arg(out_dir)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn read_json(path: &Path) -> Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).expect("valid JSON")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn assert_valid(schema_name: &str, instance: &Value) {
    let schema = read_json(&schema_dir().join(schema_name));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{e}"))
        .collect();
    assert!(
        errors.is_empty(),
        "instance violates {schema_name}: {errors:?}"
    );
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn herald_ideal_reports_bell_statistics() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["herald", "--ideal"]);
    let report = read_json(&dir.path().join("herald_report.json"));
    assert_valid("herald_report.schema.json", &report);

    let results = report["results"].as_array().unwrap();
    let by_class = |class: &str| {
        results
            .iter()
            .find(|r| r["class"] == class)
            .unwrap_or_else(|| panic!("missing class {class}"))
    };
    for class in ["psi_minus", "psi_plus"] {
        let entry = by_class(class);
        assert!((entry["probability"].as_f64().unwrap() - 0.25).abs() < 1e-10);
        assert!((entry["fidelity_to_target"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }

    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_valid("manifest.schema.json", &manifest);
    // Digest recorded in the manifest matches the file on disk.
    let bytes = fs::read(dir.path().join("herald_report.json")).unwrap();
    assert_eq!(
        manifest["outputs"][0]["sha256"].as_str().unwrap(),
        sha256_hex(&bytes)
    );
}

#[test]
fn herald_is_deterministic() {
    let dir1 = TempDir::new().unwrap();
    let dir2 = TempDir::new().unwrap();
    let args = ["herald", "--distance-km", "10", "--eta", "0.7"];
    run_ok(dir1.path(), &args);
    run_ok(dir2.path(), &args);
    let a = fs::read(dir1.path().join("herald_report.json")).unwrap();
    let b = fs::read(dir2.path().join("herald_report.json")).unwrap();
    assert_eq!(a, b, "herald output is not byte-identical");
}

#[test]
fn chsh_ideal_hits_tsirelson() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["chsh", "--trials", "200000", "--seed", "7"]);
    let report = read_json(&dir.path().join("chsh_report.json"));
    assert_valid("chsh_report.schema.json", &report);
    let analytic = report["analytic_s"].as_f64().unwrap();
    assert!((analytic.abs() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-10);
    let mc = &report["monte_carlo"];
    let se = mc["std_error"].as_f64().unwrap();
    assert!((mc["s_estimate"].as_f64().unwrap() - analytic).abs() < 4.0 * se);
}

#[test]
fn chsh_is_seed_deterministic_across_thread_counts() {
    let dir1 = TempDir::new().unwrap();
    let dir2 = TempDir::new().unwrap();
    let args = ["chsh", "--trials", "50000", "--seed", "99"];
    binary()
        .args(args)
        .arg("--out")
        .arg(dir1.path())
        .arg("--threads")
        .arg("1")
        .status()
        .unwrap();
    binary()
        .args(args)
        .arg("--out")
        .arg(dir2.path())
        .arg("--threads")
        .arg("4")
        .status()
        .unwrap();
    let a = fs::read(dir1.path().join("chsh_report.json")).unwrap();
    let b = fs::read(dir2.path().join("chsh_report.json")).unwrap();
    assert_eq!(a, b, "thread count changed the CHSH output");
}

#[test]
fn chsh_reads_heralded_state_from_report() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["herald", "--overlap", "0.8"]);
    let herald_path = dir.path().join("herald_report.json");
    run_ok(
        dir.path(),
        &[
            "chsh",
            "--state",
            herald_path.to_str().unwrap(),
            "--analytic-only",
        ],
    );
    let report = read_json(&dir.path().join("chsh_report.json"));
    // Overlap μ leaves the mixture μ²ψ⁻ + (1−μ²)/2 (s1s2 + s2s1), whose
    // equatorial CHSH value is 2√2·μ².
    let expected = 2.0 * std::f64::consts::SQRT_2 * 0.64;
    assert!(
        (report["analytic_s"].as_f64().unwrap().abs() - expected).abs() < 1e-9,
        "analytic S {}",
        report["analytic_s"]
    );
}

#[test]
fn rate_presets_reproduce_published_rates() {
    let dir = TempDir::new().unwrap();
    run_ok(
        dir.path(),
        &["rate", "--preset", "paper-3mm", "--pairs", "1000"],
    );
    let report = read_json(&dir.path().join("rate_report.json"));
    assert_valid("rate_report.schema.json", &report);
    let per_minute = report["pairs_per_minute"].as_f64().unwrap();
    assert!((4.5..=5.5).contains(&per_minute), "rate {per_minute}/min");
    let hours = report["seconds_to_requested_pairs"].as_f64().unwrap() / 3600.0;
    assert!((3.0..4.0).contains(&hours), "hours {hours}");

    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["rate", "--preset", "paper-1mm"]);
    let report = read_json(&dir.path().join("rate_report.json"));
    let per_second = report["pairs_per_second"].as_f64().unwrap();
    assert!((2.6..=3.3).contains(&per_second), "rate {per_second}/s");
}

#[test]
fn timing_preset_passes_all_checks() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["timing", "--preset", "paper-10km"]);
    let report = read_json(&dir.path().join("timing_report.json"));
    assert_valid("timing_report.schema.json", &report);
    assert_eq!(report["report"]["all_passed"], Value::Bool(true));
    let checks = report["report"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    for check in checks {
        assert!(check["margin_s"].as_f64().unwrap() > 0.0);
    }
    let window = report["max_choice_to_detection_window_s"].as_f64().unwrap();
    assert!((window - 33.3e-6).abs() <= 0.1e-6);
}

#[test]
fn timing_accepts_scenario_file_and_sweeps() {
    let dir = TempDir::new().unwrap();
    let scenario = serde_json::json!({
        "x_a": 0.0,
        "x_b": 10000.0,
        "x_i": 5000.0,
        "fiber_speed": 2e8,
        "excitation_to_choice": 0.0,
        "choice_to_rotation": 3e-6,
        "readout_duration": 23e-6,
        "excitation_to_emission": 0.0
    });
    let scenario_path = dir.path().join("scenario.json");
    fs::write(&scenario_path, scenario.to_string()).unwrap();
    assert_valid("scenario.schema.json", &scenario);
    run_ok(
        dir.path(),
        &[
            "timing",
            "--scenario",
            scenario_path.to_str().unwrap(),
            "--sweep",
            "excitation-to-choice",
            "--sweep-range",
            "0,2e-5,21",
        ],
    );
    let report = read_json(&dir.path().join("timing_report.json"));
    // Zero delay with a slow fiber: the herald-cone constraint fails.
    assert_eq!(report["report"]["all_passed"], Value::Bool(false));
    let min_delay = report["min_excitation_to_choice_delay_s"].as_f64().unwrap();
    assert!((min_delay - 8.3218e-6).abs() < 1e-9);

    let sweep = fs::read_to_string(dir.path().join("timing_sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("value,"), "missing CSV header: {header}");
    // The sweep crosses from failing to passing at the minimum delay.
    let passes: Vec<bool> = lines
        .map(|l| l.rsplit(',').next().unwrap() == "true")
        .collect();
    assert!(!passes[0]);
    assert!(*passes.last().unwrap());
}

#[test]
fn cavity_scan_emits_csv_with_header() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["cavity-scan"]);
    let csv = fs::read_to_string(dir.path().join("cavity_scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "length_m,omega_rad_per_s,gamma_opt_per_s,finesse_pi,finesse_4pi,p_cav"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    // Finesse column is length independent.
    let finesse: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!((finesse[0] - finesse[1]).abs() / finesse[0] < 1e-9);
    assert!((finesse[0] - 19047.0).abs() < 100.0);
}

#[test]
fn hom_subcommand_reports_the_dip() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["hom"]);
    let report = read_json(&dir.path().join("hom_report.json"));
    assert_valid("hom_report.schema.json", &report);
    assert!(report["coincidence_probability"].as_f64().unwrap().abs() < 1e-12);

    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["hom", "--offset-bins", "1"]);
    let report = read_json(&dir.path().join("hom_report.json"));
    assert!((report["coincidence_probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn phase_sweep_emits_expected_columns() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["phase-sweep", "--grid", "3"]);
    let csv = fs::read_to_string(dir.path().join("phase_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "phi_a,phi_b,herald_class,probability,fidelity"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 3 * 3);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5);
        let class = fields[2];
        let fidelity: f64 = fields[4].parse().unwrap();
        match class {
            "psi_minus" | "psi_plus" => assert!((fidelity - 1.0).abs() < 1e-10),
            "single_photon" => assert!((0.0..=1.0).contains(&fidelity)),
            other => panic!("unexpected class {other}"),
        }
    }
}

#[test]
fn custom_circuit_file_is_honored() {
    let dir = TempDir::new().unwrap();
    // The built-in analyzer expressed as a circuit document.
    let circuit = serde_json::json!({
        "elements": [
            {"kind": "beam_splitter", "inputs": ["A", "B"], "outputs": ["C", "D"],
             "transmissivity": 0.5, "phase": 0.0},
            {"kind": "polarizing_beam_splitter", "input": "C", "transmit": "D1", "reflect": "D2"},
            {"kind": "polarizing_beam_splitter", "input": "D", "transmit": "D4", "reflect": "D3"}
        ]
    });
    assert_valid("circuit.schema.json", &circuit);
    let circuit_path = dir.path().join("circuit.json");
    fs::write(&circuit_path, circuit.to_string()).unwrap();
    run_ok(
        dir.path(),
        &["herald", "--circuit", circuit_path.to_str().unwrap()],
    );
    let report = read_json(&dir.path().join("herald_report.json"));
    let minus = report["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["class"] == "psi_minus")
        .unwrap();
    assert!((minus["probability"].as_f64().unwrap() - 0.25).abs() < 1e-10);
}

#[test]
fn herald_accepts_config_file_with_flag_overrides() {
    let dir = TempDir::new().unwrap();
    let config = serde_json::json!({
        "channel_a": {"length_km": 5.0},
        "channel_b": {"length_km": 5.0},
        "detector": {"efficiency": 1.0, "dark_count_prob": 0.0, "number_resolving": false}
    });
    let config_path = dir.path().join("attempt.json");
    fs::write(&config_path, config.to_string()).unwrap();
    run_ok(
        dir.path(),
        &[
            "herald",
            "--config",
            config_path.to_str().unwrap(),
            "--eta",
            "0.7",
        ],
    );
    let report = read_json(&dir.path().join("herald_report.json"));
    // 5 km per arm at 1 dB/km and eta 0.7: usable heralds at
    // 0.5 * 0.1 * 0.49 split evenly between the two classes.
    let minus = report["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["class"] == "psi_minus")
        .unwrap();
    assert!((minus["probability"].as_f64().unwrap() - 0.25 * 0.1 * 0.49).abs() < 1e-10);
    // The flag override is echoed back in the config.
    assert_eq!(
        report["config"]["detector"]["efficiency"].as_f64().unwrap(),
        0.7
    );
}

#[test]
fn usage_errors_exit_2() {
    let output = binary()
        .arg("herald")
        .arg("--no-such-flag")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let output = binary().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_1_with_json() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let output = binary()
        .args(["herald", "--config", bad.to_str().unwrap()])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr: Value =
        serde_json::from_slice(&output.stderr).expect("stderr is machine-readable JSON");
    assert!(stderr["error"]["kind"].is_string());
    assert!(stderr["error"]["message"].is_string());

    // Out-of-range physics parameters also exit 1.
    let output = binary()
        .args(["herald", "--eta", "1.5"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr: Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(stderr["error"]["kind"], "invalid_parameter");
}

#[test]
fn rate_sweep_uses_cavity_model() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["rate", "--sweep-length", "1e-3,1e-2,5"]);
    let csv = fs::read_to_string(dir.path().join("rate_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "length_m,p_cav,pairs_per_second");
    let rates: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rates.len(), 5);
    // Shorter cavities pump faster.
    assert!(rates.first().unwrap() > rates.last().unwrap());
}
