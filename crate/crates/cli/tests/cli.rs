use std::path::Path;
use std::process::{Command, Output};

fn reldft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reldft"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn hydrogenic_ground_row_matches_oracle() {
    let out = reldft(&["hydrogenic"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# reldft hydrogenic\n"));
    assert!(text.contains("# Z = "));
    assert!(text.contains("# c = "));
    let lines = data_lines(&text);
    assert_eq!(
        lines[0],
        [
            "state_label",
            "E_total_au",
            "E_binding_au",
            "E_oracle_au",
            "rel_error"
        ]
    );
    assert_eq!(lines[1][0], "1s1/2");
    let rel: f64 = lines[1][4].parse().unwrap();
    assert!(rel <= 1e-6, "rel_error {rel}");
    let total: f64 = lines[1][1].parse().unwrap();
    let binding: f64 = lines[1][2].parse().unwrap();
    assert!((binding + 0.5).abs() < 1e-4);
    assert!(total > 18778.0);
}

#[test]
fn zero_charge_gives_empty_table() {
    let out = reldft(&["hydrogenic", "--Z", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_lines(&stdout(&out)).len(), 1);
}

#[test]
fn invalid_kappa_is_a_configuration_error() {
    let out = reldft(&["hydrogenic", "--kappa", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--kappa"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn supercritical_charge_is_rejected() {
    let out = reldft(&["hydrogenic", "--Z", "140"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_fails_before_running() {
    let out = reldft(&["hydrogenic", "--zz", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn virial_rows_for_hydrogen() {
    let out = reldft(&["virial", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["parameters"]["Z"].as_f64(), Some(1.0));
    let states = v["states"].as_array().unwrap();
    assert!(!states.is_empty());
    let ground = &states[0];
    assert_eq!(ground["state_label"], "1s1/2");
    assert!(ground["virial_rel_residual"].as_f64().unwrap() <= 1e-5);
    for s in states {
        assert!(s["route_rel_residual"].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn functional_is_reproducible_for_a_seed() {
    let a = reldft(&["functional", "--seed", "3", "--format", "json"]);
    let b = reldft(&["functional", "--seed", "3", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let f_min = v["F_min"].as_f64().unwrap();
    let oracle = v["ground_oracle"].as_f64().unwrap();
    assert!(((f_min - oracle) / oracle).abs() <= 1e-6);
    assert!(v["min_eig_H"].as_f64().unwrap() <= -18778.0);
    assert!(v["gradient_check_max_rel_err"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn exhausted_minimizer_is_a_numerical_error() {
    let out = reldft(&["functional", "--max-iter", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn lattice_probe_csv_has_summary_row() {
    let out = reldft(&["lattice-probe", "--trials", "12", "--sites", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lines = data_lines(&stdout(&out));
    let header = &lines[0];
    let shift = column(header, "constant_shift_pair");
    let dist = column(header, "density_distance");
    assert_eq!(lines.len(), 1 + 12 + 1);
    assert_eq!(lines[1][shift], "true");
    assert_eq!(lines[11][shift], "true");
    assert_eq!(lines[2][shift], "false");
    let summary = lines.last().unwrap();
    assert_eq!(summary[0], "summary");
    assert_eq!(summary[shift], "2");
    assert_eq!(summary[column(header, "counterexample_flag")], "0");
    assert!(summary[dist].parse::<f64>().unwrap() >= 1e-6);
}

#[test]
fn zero_trials_is_a_configuration_error() {
    let out = reldft(&["lattice-probe", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_path_in_missing_directory_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("r.csv");
    let out = reldft(&["hydrogenic", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("h.csv");
    let file = reldft(&["hydrogenic", "--Z", "20", "--out", target.to_str().unwrap()]);
    assert_eq!(file.status.code(), Some(0));
    assert!(file.stdout.is_empty());
    let direct = reldft(&["hydrogenic", "--Z", "20"]);
    assert_eq!(std::fs::read(&target).unwrap(), direct.stdout);
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# run\nZ = 20\nformat = json\nkappa = 1\n");
    let out = reldft(&["hydrogenic", "--config", &cfg, "--kappa", "-1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["parameters"]["Z"].as_f64(), Some(20.0));
    assert_eq!(v["parameters"]["kappa"].as_i64(), Some(-1));
    assert_eq!(v["states"][0]["state_label"], "1s1/2");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "charge = 3\n");
    let out = reldft(&["hydrogenic", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("charge"));
}
