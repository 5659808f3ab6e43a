use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::DVector;
use plsdof::simulate::synthetic_base_design;
use plsdof::RawDataset;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_plsdof"));
    c.env_remove("PLSDOF_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn assert_schema(schema_name: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{schema_name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

/// Linear response plus uniform noise on uniform predictors.
fn write_random_csv(dir: &Path, name: &str, n: usize, p: usize, seed: u64) -> String {
    let m = synthetic_base_design(n, p + 1, seed);
    let x = m.columns(0, p).into_owned();
    let y = DVector::from_fn(n, |i, _| (0..p).map(|j| x[(i, j)] / (j as f64 + 1.0)).sum::<f64>() + 0.3 * m[(i, p)]);
    let path = dir.join(name);
    RawDataset::new(x, y).unwrap().write_csv(&path).unwrap();
    path.display().to_string()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn fit_emits_one_coefficient_vector_per_component_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 30, 6, 1);
    let v = stdout_json(&run(&["fit", "--input", &csv, "--target", "y", "--m-max", "5"]));
    assert_schema("fit", &v);
    let path = v["path"].as_array().unwrap();
    assert_eq!(path.len(), 6);
    assert!(path.iter().all(|e| e["coefficients"].as_array().unwrap().len() == 6));
    let rss: Vec<f64> = path.iter().map(|e| e["training_rss"].as_f64().unwrap()).collect();
    assert!(rss.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn fit_with_zero_components_is_the_mean_model() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 20, 3, 2);
    let v = stdout_json(&run(&["fit", "-i", &csv, "-t", "y", "--m-max", "0"]));
    let path = v["path"].as_array().unwrap();
    assert_eq!(path.len(), 1);
    assert!(path[0]["coefficients"].as_array().unwrap().iter().all(|c| c.as_f64() == Some(0.0)));
    let fitted: Vec<f64> = path[0]["fitted"].as_array().unwrap().iter().map(|f| f.as_f64().unwrap()).collect();
    assert!(fitted.iter().all(|&f| (f - path[0]["intercept"].as_f64().unwrap()).abs() < 1e-12));
}

#[test]
fn fit_csv_format_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 20, 3, 3);
    let out = run(&["fit", "-i", &csv, "-t", "y", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,intercept,training_rss,x1,x2,x3");
    assert_eq!(lines.len(), 5);
}

#[test]
fn input_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 20, 3, 4);
    let missing = run(&["fit", "-i", "/definitely/not/here.csv", "-t", "y"]);
    assert_eq!(exit_code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("Io"));

    let no_target = run(&["fit", "-i", &csv, "-t", "nope"]);
    assert_eq!(exit_code(&no_target), 2);
    assert!(String::from_utf8_lossy(&no_target.stderr).contains("MissingTarget"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,y\n1,2\nfoo,3\n").unwrap();
    let cell = run(&["fit", "-i", bad.to_str().unwrap(), "-t", "y"]);
    assert_eq!(exit_code(&cell), 2);
    assert!(String::from_utf8_lossy(&cell.stderr).contains("NonNumericCell"));

    assert_eq!(exit_code(&run(&["fit", "-i", &csv, "-t", "y", "--m-max", "9"])), 2);
    assert_eq!(exit_code(&run(&["fit", "-i", &csv])), 2);
    assert_eq!(exit_code(&run(&["dof", "-i", &csv, "-t", "y", "--engine", "magic"])), 2);
}

#[test]
fn numerical_failure_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("huge.csv");
    std::fs::write(&path, "a,b,y\n1,0,1e300\n0,1,-1e300\n1,1,2e300\n-1,2,0\n").unwrap();
    let out = run(&["fit", "-i", path.to_str().unwrap(), "-t", "y"]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("NumericalOverflow"));
}

#[test]
fn dof_engines_agree_on_random_data() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 25, 7, 5);
    let v = stdout_json(&run(&["dof", "-i", &csv, "-t", "y", "--engine", "both"]));
    assert_schema("dof", &v);
    assert!(v["max_disagreement"].as_f64().unwrap() < 1e-6);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0]["lanczos"].as_f64(), Some(1.0));
    assert!((rows[7]["krylov"].as_f64().unwrap() - 8.0).abs() < 1e-6);
}

#[test]
fn naive_engine_reports_component_count_plus_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 25, 5, 6);
    let v = stdout_json(&run(&["dof", "-i", &csv, "-t", "y", "--engine", "naive"]));
    assert_schema("dof", &v);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["naive"].as_f64().unwrap(), row["m"].as_f64().unwrap() + 1.0);
        assert!(row["lanczos"].is_null() && row["krylov"].is_null());
    }
    assert!(v["max_disagreement"].is_null());
}

#[test]
fn rank_deficient_input_truncates_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rd.csv");
    let m = synthetic_base_design(30, 4, 7);
    let mut text = String::from("a,b,c,s,y\n");
    for i in 0..30 {
        let (a, b, c) = (m[(i, 0)], m[(i, 1)], m[(i, 2)]);
        text += &format!("{a:?},{b:?},{c:?},{:?},{:?}\n", a + b, a - 0.5 * c + 0.2 * m[(i, 3)]);
    }
    std::fs::write(&path, text).unwrap();
    let out = run(&["dof", "-i", path.to_str().unwrap(), "-t", "y"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("DegenerateComponent"));
    let v = stdout_json(&out);
    assert_schema("dof", &v);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["degenerate_at"].as_u64(), Some(4));
    assert_eq!(v["warnings"][0]["kind"], "DegenerateComponent");
}

#[test]
fn noise_only_fixture_selects_the_empty_model() {
    let v = stdout_json(&run(&["select", "-i", &fixture("noise_only.csv"), "-t", "y", "--method", "bic-krylov"]));
    assert_schema("select", &v);
    assert_eq!(v["chosen_m"].as_u64(), Some(0));
    assert_eq!(v["method"], "KRYLOV");
}

#[test]
fn naive_criterion_picks_at_least_as_many_components_on_high_d_fixture() {
    let chosen = |method: &str| {
        let v = stdout_json(&run(&["select", "-i", &fixture("high_d.csv"), "-t", "y", "--method", method]));
        assert_schema("select", &v);
        v["chosen_m"].as_u64().unwrap()
    };
    assert!(chosen("bic-naive") >= chosen("bic-krylov"));
}

#[test]
fn cross_validation_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 40, 5, 8);
    let args = ["select", "-i", &csv, "-t", "y", "--method", "cv", "--folds", "10", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_schema("select", &v);
    assert!(v["dof"].as_f64().is_some() && v["sigma_hat"].as_f64().is_some());
}

#[test]
fn select_reports_holdout_error() {
    let dir = tempfile::tempdir().unwrap();
    let train = write_random_csv(dir.path(), "train.csv", 40, 4, 9);
    let test = write_random_csv(dir.path(), "test.csv", 30, 4, 10);
    let v = stdout_json(&run(&["select", "-i", &train, "-t", "y", "--method", "bic-lanczos", "--test", &test]));
    assert_schema("select", &v);
    assert_eq!(v["test"]["n"].as_u64(), Some(30));
    assert!(v["test"]["normalized_error"].as_f64().unwrap() < 1.0);

    let other = write_random_csv(dir.path(), "other.csv", 30, 3, 11);
    let out = run(&["select", "-i", &train, "-t", "y", "--test", &other]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 40, 5, 12);
    let args = ["select", "-i", &csv, "-t", "y", "--method", "cv", "--seed", "3"];
    let one = bin().args(args).env("PLSDOF_THREADS", "1").output().unwrap();
    let many = bin().args(args).env("PLSDOF_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    let zero = bin().args(args).env("PLSDOF_THREADS", "0").output().unwrap();
    assert_eq!(exit_code(&zero), 2);
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn compare_writes_metrics_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 203, 12, 13);
    let out_dir: PathBuf = dir.path().join("out");
    let o = out_dir.to_str().unwrap();
    let out = run(&["compare", "-i", &csv, "-t", "y", "--reps", "2", "--seed", "5", "--out-dir", o]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let json: Value = serde_json::from_str(&read(&out_dir, "comparison.json")).unwrap();
    assert_schema("compare", &json);
    let metrics = json["metrics"].as_array().unwrap();
    assert_eq!(metrics.len(), 6);
    assert!(metrics.iter().all(|m| m["test_mse"].as_f64().unwrap().is_finite()));

    let mut rdr = csv::Reader::from_path(out_dir.join("comparison_curves.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let f = |name: &str| rec[col(name)].parse::<f64>().unwrap();
        assert!(f("pls_training_error") <= f("pcr_training_error") + 1e-10);
        assert_eq!(f("pcr_dof"), f("m") + 1.0);
    }
    assert_eq!(read(&out_dir, "comparison_metrics.csv").lines().count(), 7);

    let again = dir.path().join("again");
    run(&["compare", "-i", &csv, "-t", "y", "--reps", "2", "--seed", "5", "--out-dir", again.to_str().unwrap()]);
    for name in ["comparison.json", "comparison_metrics.csv", "comparison_curves.csv"] {
        assert_eq!(read(&out_dir, name), read(&again, name));
    }
}

#[test]
fn compare_rejects_oversized_split() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_random_csv(dir.path(), "d.csv", 60, 4, 14);
    let out = run(&["compare", "-i", &csv, "-t", "y", "--n-test", "153", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("SplitTooLarge"));
}

#[test]
fn simulate_single_cell_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&["simulate", "--reps", "1", "--d", "10", "--seed", "1", "--out-dir", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv = read(&a, "simulation.csv");
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(csv, read(&b, "simulation.csv"));
    assert_eq!(read(&a, "simulation.json"), read(&b, "simulation.json"));
    assert_schema("simulate", &serde_json::from_str(&read(&a, "simulation.json")).unwrap());
}

#[test]
fn simulate_reports_medians_per_cell_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "--reps", "10", "--d", "10,90", "--seed", "2", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&read(dir.path(), "simulation.json")).unwrap();
    assert_schema("simulate", &v);
    assert_eq!(v["medians"].as_array().unwrap().len(), 8);
    assert_eq!(v["rows"].as_array().unwrap().len(), 80);
}

#[test]
fn simulate_reads_config_file_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    std::fs::write(&cfg, "reps = 3\nd = [10]\nseed = 4\nm_max = 8\nfolds = 5\n").unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--reps", "1", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&read(dir.path(), "simulation.json")).unwrap();
    assert_eq!(v["reps"].as_u64(), Some(1));
    assert_eq!(v["seed"].as_u64(), Some(4));
    assert_eq!(v["m_max"].as_u64(), Some(8));
}

#[test]
fn simulate_config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "reps = 3\ncolour = \"blue\"\n").unwrap();
    assert_eq!(exit_code(&run(&["simulate", "--config", cfg.to_str().unwrap()])), 2);
    let o = dir.path().to_str().unwrap();
    assert_eq!(exit_code(&run(&["simulate", "--reps", "0", "--out-dir", o])), 2);
    assert_eq!(exit_code(&run(&["simulate", "--snr", "-1", "--out-dir", o])), 2);
    assert_eq!(exit_code(&run(&["simulate", "--n-train", "100", "--n-test", "153", "--out-dir", o])), 2);
}

#[test]
fn json_schema_flag_prints_each_schema() {
    for (cmd, file) in [("fit", "fit"), ("dof", "dof"), ("select", "select"), ("compare", "compare"), ("simulate", "simulate")] {
        let out = run(&[cmd, "--json-schema"]);
        assert!(out.status.success(), "{cmd}");
        let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
        let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{file}.schema.json"));
        let shipped: Value = serde_json::from_str(&std::fs::read_to_string(shipped).unwrap()).unwrap();
        assert_eq!(printed, shipped);
        jsonschema::validator_for(&printed).expect("schema compiles");
    }
}
