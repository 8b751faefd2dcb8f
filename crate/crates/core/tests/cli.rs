//! Black-box tests of the `charclass` binary: output and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn charclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charclass")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scenario(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn eval_examples() {
    let o = charclass(&["eval", "-e", "integrate(P(2), ch(O(3))*td(T))"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "10\n");

    let o = charclass(&["eval", "-e", "X = proj_bundle(universal2(6), S); pushforward(proj(X), A(X)^3)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1/4*c1^2 - 1*c2\n");
}

#[test]
fn input_errors_exit_with_two() {
    let o = charclass(&["eval", "-e", "integrate(P(2), ch(O"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column 21"), "{}", stderr(&o));

    let o = charclass(&["eval", "-e", "frobnicate(P(2))"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frobnicate"), "{}", stderr(&o));

    let o = charclass(&["run", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.json", r#"{"mode": "hrr", "name": "x", "max_n": 2,"#);
    let o = charclass(&["run", "--scenario", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    let unknown = write_temp(&dir, "unknown.json", r#"{"mode": "hrr", "name": "x", "max_n": 2, "max_k": 2, "extra": 1}"#);
    assert_eq!(charclass(&["run", "--scenario", &unknown]).status.code(), Some(2));

    let o = charclass(&["numeric", "--scenario", &scenario("hrr.json")]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(charclass(&["err-transfer", "--series", "[0, 1]", "--which", "O+1", "--order", "1"]).status.code(), Some(2));
    assert_eq!(charclass(&["err-transfer", "--series", "[1, 1]", "--which", "O", "--order", "1"]).status.code(), Some(2));
    assert_eq!(charclass(&["bogus"]).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_temp(
        &dir,
        "wrong.json",
        r#"{"mode": "symbolic", "name": "wrong", "cases": [{"expr": "integrate(P(2), ch(O(3))*td(T))", "expected": "11"}]}"#,
    );
    let o = charclass(&["run", "--scenario", &f]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], serde_json::json!(false));
}

#[test]
fn bundled_exact_scenarios_pass() {
    for name in ["hrr.json", "symbolic.json", "solve_r.json", "tower.json"] {
        let o = charclass(&["run", "--scenario", &scenario(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}{}", stdout(&o), stderr(&o));
    }
    let o = charclass(&["tower-check", "--config", &scenario("tower_configs.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = charclass(&["hrr", "--max-n", "4", "--max-k", "5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn solve_r_subcommand_round_trip() {
    let a = stdout(&charclass(&["err-transfer", "--series", "[0, 2, 0, 1/3]", "--which", "O", "--order", "1"]));
    let b = stdout(&charclass(&["err-transfer", "--series", "[0, 2, 0, 1/3]", "--which", "O-1", "--order", "1"]));
    let list = |text: &str| {
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        let items: Vec<&str> = v["series_in_u"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
        format!("[{}]", items.join(", "))
    };
    let o = charclass(&["solve-r", "--target-o", &list(&a), "--target-o1", &list(&b), "--order", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["r"], serde_json::json!(["0", "2", "0", "1/3"]));
}

#[test]
fn numeric_scenario_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_temp(
        &dir,
        "numeric.json",
        r#"{"mode": "numeric", "name": "small", "checks": [
            {"kind": "degree", "degree": 1, "n": 64, "tolerance": 1e-4},
            {"kind": "downstairs", "n": 32, "tolerance": 1e-3,
             "datum": {"type": "metric_change", "rho1": "1/(1 + abs2(z))", "rho2": "2/(1 + abs2(z))"}}
        ]}"#,
    );
    let out_dir = dir.path().join("grids");
    let o = charclass(&["numeric", "--scenario", &f, "--csv", &out_dir.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let csv = std::fs::read_to_string(out_dir.join("check1_downstairs.csv")).unwrap();
    assert!(csv.starts_with("re,im,lhs,rhs,residual\n"));
    assert!(csv.lines().count() > 100);

    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let value = v["results"][0]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-4);
    // 12 significant digits at most
    let digits = format!("{value}").chars().filter(|c| c.is_ascii_digit()).count();
    assert!(digits <= 13, "{value}");
}

#[test]
fn out_of_range_grid_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_temp(&dir, "n.json", r#"{"mode": "numeric", "name": "n", "checks": [{"kind": "degree", "degree": 1, "n": 2, "tolerance": 1}]}"#);
    assert_eq!(charclass(&["run", "--scenario", &f]).status.code(), Some(2));
}
