use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proxpoint::experiment::{parse_trace, read_signal};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_proxpoint"));
    c.env_remove("PROXPOINT_SEED");
    c
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const PROBLEM: &str = r#"{
  "dim": 3,
  "constraints": [
    {"type": "hyperplane", "normal": [1, 1, 1], "offset": 1},
    {"type": "halfspace", "normal": [-1, 0, 0], "offset": 0},
    {"type": "prescription",
     "operator": {"name": "soft_threshold", "lo": -0.5, "hi": 0.5},
     "truth": [0.9, 0.1, 0.0]}
  ],
  "affine": [{"constraint": 0}],
  "control": {"max_iter": 5000, "relaxation": "alternating"}
}"#;

#[test]
fn solve_writes_solution_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", PROBLEM);
    let out = dir.path().join("out");
    let o = run(bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = read_signal(&out.join("solution.csv")).unwrap();
    for (got, want) in x.iter().zip([0.9, 0.05, 0.05]) {
        assert!((got - want).abs() < 1e-6, "{x:?}");
    }
    let rows = parse_trace(&fs::read_to_string(out.join("trace.csv")).unwrap()).unwrap();
    assert!(!rows.is_empty());
    assert_eq!(rows[0].n, 0);
}

#[test]
fn infeasible_problem_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        r#"{"dim": 1, "x0": [0],
            "constraints": [
              {"type": "halfspace", "normal": [1], "offset": 0},
              {"type": "halfspace", "normal": [-1], "offset": -1}
            ]}"#,
    );
    let o = run(bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o")));
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn config_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        dir.path(),
        "a.json",
        r#"{"dim": 1, "constraints": [], "colour": 1}"#,
    );
    let empty = write(dir.path(), "b.json", r#"{"dim": 2, "constraints": []}"#);
    let bad_band = write(dir.path(), "c.json", r#"{"N": 16, "B": 4}"#);
    for args in [
        vec!["solve".as_ref(), "--config".as_ref(), unknown.as_os_str()],
        vec!["solve".as_ref(), "--config".as_ref(), empty.as_os_str()],
        vec![
            "solve".as_ref(),
            "--config".as_ref(),
            dir.path().join("missing.json").as_os_str(),
        ],
        vec!["demo".as_ref(), "--config".as_ref(), bad_band.as_os_str()],
    ] {
        let o = run(bin().args(&args).arg("--out").arg(dir.path().join("o")));
        assert_eq!(
            o.status.code(),
            Some(3),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = run(bin()
        .args(["demo", "--iters", "5"])
        .arg("--out")
        .arg(dir.path().join("o"))
        .env("PROXPOINT_SEED", "x"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn demo_outputs_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"N": 32, "B": 5, "K": 3, "block_dim": 3, "iters": 40, "seed": 1}"#,
    );
    let demo = |out: &str, seed_env: Option<&str>, extra: &[&str]| {
        let mut c = bin();
        c.args(["demo", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .args(extra);
        if let Some(s) = seed_env {
            c.env("PROXPOINT_SEED", s);
        }
        let o = run(&mut c);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        dir.path().join(out)
    };
    let a = demo("a", None, &[]);
    for f in [
        "signal.csv",
        "reference.csv",
        "solution_affine.csv",
        "solution_plain.csv",
        "trace_affine.csv",
        "trace_plain.csv",
        "summary.json",
    ] {
        assert!(a.join(f).exists(), "{f}");
    }
    let rows = parse_trace(&fs::read_to_string(a.join("trace_plain.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 41);
    assert_eq!(rows[0].normalized_error, Some(1.0));

    let read = |d: &Path| fs::read(d.join("signal.csv")).unwrap();
    let b = demo("b", Some("1"), &[]);
    assert_eq!(read(&a), read(&b));
    let c = demo("c", Some("2"), &[]);
    assert_ne!(read(&a), read(&c));
    // the flag wins over the environment
    let d = demo("d", Some("2"), &["--seed", "1"]);
    assert_eq!(read(&a), read(&d));

    let e = demo("e", None, &["--variant", "plain"]);
    assert!(!e.join("trace_affine.csv").exists());
    assert!(e.join("trace_plain.csv").exists());
}

#[test]
fn check_passes() {
    let o = run(bin().args(["check", "--trials", "200", "--seed", "3"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(text.lines().count() >= 6);
}
