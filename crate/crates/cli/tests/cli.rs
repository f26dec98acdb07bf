use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

fn bestprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bestprox")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    let pass = bestprox(&["check", "--scenario", path_str(&scenario("two_interval"))]);
    assert_eq!(pass.status.code(), Some(0));
    let stdout = String::from_utf8(pass.stdout).unwrap();
    assert!(stdout.contains("contraction") && stdout.contains("PASS"));

    let fail = bestprox(&["check", "--scenario", path_str(&scenario("violating"))]);
    assert_eq!(fail.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"name\": \"x\",").unwrap();
    let parse = bestprox(&["check", "--scenario", path_str(&broken)]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8(parse.stderr).unwrap().contains("line 1"));

    let missing = bestprox(&["check", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn run_writes_report_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = bestprox(&["run", "--scenario", path_str(&scenario("two_interval")), "--out", path_str(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["report.txt", "trace_1.csv", "trace_2.csv", "trace_3.csv"]);
    let trace = std::fs::read_to_string(out.join("trace_1.csv")).unwrap();
    assert!(trace.starts_with("step,subset,x1,d_n,order_certified,in_band\n"));
}

#[test]
fn parallel_output_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let file = scenario("three_boxes");
    assert!(bestprox(&["run", "--scenario", path_str(&file), "--out", path_str(&a)]).status.success());
    assert!(bestprox(&["run", "--scenario", path_str(&file), "--out", path_str(&b), "--parallel"])
        .status
        .success());
    for entry in std::fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn overrides_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let res = bestprox(&[
        "run",
        "--scenario",
        path_str(&scenario("two_interval")),
        "--out",
        path_str(&out),
        "--tol",
        "1e-6",
        "--max-steps",
        "8",
        "--seed",
        "42",
    ]);
    assert!(res.status.success());
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("max_steps 8, rng_seed 42"));
    assert!(report.contains("status incomplete"));

    let bad = bestprox(&[
        "run",
        "--scenario",
        path_str(&scenario("two_interval")),
        "--out",
        path_str(&out),
        "--tol",
        "-1",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}
