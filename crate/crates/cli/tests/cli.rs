use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_mbl");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mbl(args: &[&str]) -> Run {
    mbl_env(args, &[])
}

fn mbl_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let out = Command::new(BIN).args(args).envs(env.iter().copied()).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let r = mbl(args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn named(v: &Value, name: &str) -> Value {
    v["rows"].as_array().unwrap().iter().find(|r| r[0] == name).unwrap_or_else(|| panic!("no row {name}"))[1].clone()
}

fn column(v: &Value, name: &str) -> Vec<Value> {
    let idx = v["columns"].as_array().unwrap().iter().position(|c| c == name).unwrap();
    v["rows"].as_array().unwrap().iter().map(|r| r[idx].clone()).collect()
}

fn without_duration(s: &str) -> String {
    s.lines().filter(|l| !l.contains("duration_ms")).collect::<Vec<_>>().join("\n")
}

#[test]
fn constants_threshold_and_envelope() {
    let v = json(&["constants", "--p", "2", "--q", "4"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "constants");
    assert_eq!(v["seed"], 0);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["duration_ms"].is_u64());
    assert_eq!(v["params"]["q"], "4");
    assert!((named(&v, "threshold").as_f64().unwrap() - 1.0239).abs() < 1e-4);
    let inf = json(&["constants", "--p", "inf"]);
    assert_eq!(named(&inf, "delta_p"), 0.5);
}

#[test]
fn constants_equal_exponents_warn() {
    let r = mbl(&["constants", "--p", "3", "--q", "3"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("warning"));
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(named(&v, "threshold"), 1.0);
}

#[test]
fn validation_errors_exit_two() {
    assert_eq!(mbl(&["constants"]).code, 2);
    assert_eq!(mbl(&["constants", "--p", "0"]).code, 2);
    assert_eq!(mbl(&["intersect", "--p", "2", "--q", "4", "--n", "5", "--t-grid", "1:0:3"]).code, 2);
    assert_eq!(mbl(&["intersect", "--p", "2", "--q", "2", "--n", "5", "--t-grid", "0.5:1.5:3"]).code, 2);
    assert_eq!(mbl(&["sample", "--n", "3", "--p", "inf"]).code, 2);
    assert_eq!(mbl(&["volume", "--n", "12", "--p", "2"]).code, 2);
    assert_eq!(mbl(&["delta", "--p", "2", "--n-max", "1"]).code, 2);
    assert_eq!(mbl(&["--format", "xml", "constants", "--p", "2"]).code, 2);
}

#[test]
fn io_errors_exit_one() {
    let r = mbl(&["constants", "--p", "2", "--output", "/nonexistent-dir/out.json"]);
    assert_eq!(r.code, 1);
    let r = mbl(&["constants", "--p", "2", "--config", "/nonexistent-dir/cfg.toml"]);
    assert_eq!(r.code, 1);
}

#[test]
fn delta_column_decreases() {
    let v = json(&["delta", "--p", "2", "--n-max", "12"]);
    let d: Vec<f64> = column(&v, "delta_n").iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(d.len(), 12);
    assert!(d[..11].windows(2).all(|w| w[1] <= w[0] + 1e-9));
    assert!((d[11] - (-0.25f64).exp()).abs() < 1e-12);
    assert!(column(&v, "status")[..11].iter().all(|s| s == "converged"));
    let two = json(&["delta", "--p", "2", "--n-max", "2"]);
    assert!((column(&two, "delta_n")[0].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn config_file_feeds_the_optimizer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mbl.toml");
    std::fs::write(&cfg, "[optimizer]\nrestarts = 2\ntol = 1e-9\n\n[chain]\nburn_in = 200\n").unwrap();
    let v = json(&["delta", "--p", "0.5", "--n-max", "4", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v["meta"]["optimizer"]["restarts"], 2);
    assert_eq!(v["meta"]["optimizer"]["tol"], 1e-9);
    let s = json(&["sample", "--n", "3", "--p", "3", "--count", "20", "--config", cfg.to_str().unwrap()]);
    assert_eq!(s["meta"]["burn_in"], 200);
    std::fs::write(&cfg, "[optimiser]\n").unwrap();
    assert_eq!(mbl(&["constants", "--p", "2", "--config", cfg.to_str().unwrap()]).code, 2);
}

#[test]
fn intersect_grid_rows_are_monotone() {
    let v = json(&["intersect", "--p", "2", "--q", "4", "--beta", "2", "--n", "60", "--reps", "500", "--t-grid", "0.8:1.2:9"]);
    let f: Vec<f64> = column(&v, "fraction").iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(f.len(), 9);
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    assert!((v["meta"]["threshold"].as_f64().unwrap() - 1.0239).abs() < 1e-4);
}

#[test]
fn vandermonde_check_passes() {
    let r = mbl(&["vandermonde", "--check-gl", "--n-max", "50"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("max identity gap"));
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(v["meta"]["max_identity_gap"].as_f64().unwrap() < 1e-9);
}

#[test]
fn wlln_equal_exponents_stay_in_ball() {
    let v = json(&["wlln", "--p", "2", "--q", "2", "--n", "5,10", "--reps", "100"]);
    for m in column(&v, "mean") {
        assert!(m.as_f64().unwrap() <= 1.0);
    }
}

#[test]
fn ullman_checks() {
    let v = json(&["ullman", "--p", "2", "--grid", "-1:1:21", "--check-potential"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 21);
    assert!(v["meta"]["max_potential_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(mbl(&["ullman", "--p", "2", "--b", "2", "--check-potential"]).code, 2);
}

#[test]
fn csv_output_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eig.csv");
    let r = mbl(&["--format", "csv", "--seed", "5", "sample", "--n", "4", "--p", "1.5", "--count", "50", "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("sample: 50 eigenvalue vectors"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# schema: 1\n# command: sample\n"));
    assert!(text.contains("# seed: 5\n"));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "index,lambda_1,lambda_2,lambda_3,lambda_4");
    assert_eq!(data.len(), 51);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("eig.csv.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 5);
    assert_eq!(side["rows"].as_array().unwrap().len(), 50);
}

#[test]
fn output_ignores_thread_count() {
    let args = ["--seed", "9", "sample", "--n", "4", "--p", "3", "--count", "200"];
    let a = mbl_env(&args, &[("MBL_THREADS", "1")]);
    let b = mbl_env(&args, &[("MBL_THREADS", "4")]);
    assert_eq!(without_duration(&a.stdout), without_duration(&b.stdout));
    let c = mbl(&["--seed", "10", "sample", "--n", "4", "--p", "3", "--count", "200"]);
    assert_ne!(without_duration(&a.stdout), without_duration(&c.stdout));
}
