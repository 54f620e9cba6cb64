use std::path::{Path, PathBuf};
use std::process::Command;

use enfix_cli::bench::run_bench;
use enfix_cli::commands::run_problem;
use enfix_cli::problem::{Overrides, Problem};
use enfix_cli::report::{to_json, TRACE_HEADER};
use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn enfix(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_enfix")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_prints_report_and_exits_zero() {
    let (code, stdout, _) = enfix(&["solve", path_str(&corpus("reflection_b050.toml"))]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["outcome"]["termination"], "bound-met");
    assert_eq!(v["certificate"]["c"].as_f64().unwrap(), 0.5 / 1.5);
    assert!(v.get("timing").is_none());
}

#[test]
fn exit_codes() {
    let (code, _, err) = enfix(&["solve", path_str(&corpus("local_rejected.toml"))]);
    assert_eq!(code, 2);
    let e: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["error"], "precondition-failed");

    let (code, _, _) = enfix(&["solve", path_str(&corpus("maia_dominance_fails.toml"))]);
    assert_eq!(code, 2);
    let (code, _, _) = enfix(&["solve", path_str(&corpus("picard_reflection.toml"))]);
    assert_eq!(code, 3);
    let (code, _, _) = enfix(&["solve", "/definitely/not/here.toml"]);
    assert_eq!(code, 1);
    let (code, _, _) = enfix(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn not_certifiable_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("double.toml");
    std::fs::write(
        &f,
        r#"
[space]
dimension = 1
norm = "l2"

[operator]
form = "affine"
matrix = [[2.0]]

[certificate]
method = "estimate"

[solve]
x0 = [1.0]
"#,
    )
    .unwrap();
    let (code, _, err) = enfix(&["solve", path_str(&f)]);
    assert_eq!(code, 4, "{err}");
    let (code, stdout, _) = enfix(&["estimate", path_str(&f)]);
    assert_eq!(code, 4);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["status"], "not_certifiable");
    assert!(v["best"]["c"].as_f64().unwrap() >= 1.0);
}

#[test]
fn parse_errors_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.toml");
    std::fs::write(&f, "[space]\ndimension = 1\nnrom = \"l2\"\n").unwrap();
    let (code, _, err) = enfix(&["solve", path_str(&f)]);
    assert_eq!(code, 1);
    let e: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["error"], "parse");
    let msg = e["message"].as_str().unwrap();
    assert!(msg.contains("line 3") && msg.contains("nrom"), "{msg}");
}

#[test]
fn trace_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = dir.path().join("report.json");
    let (code, stdout, _) = enfix(&[
        "solve",
        path_str(&corpus("reflection_b025.toml")),
        "--trace-out",
        path_str(&trace),
        "--out",
        path_str(&out),
        "--timing",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["timing"]["elapsed_seconds"].as_f64().unwrap() >= 0.0);

    let csv = std::fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len() as u64, report["outcome"]["iterations"].as_u64().unwrap());
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 5);
        assert_eq!(r[0].parse::<usize>().unwrap(), i + 1);
        for x in &r[1..] {
            x.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn lambda_override_leaves_bound_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let (code, stdout, _) = enfix(&[
        "solve",
        path_str(&corpus("reflection_b050.toml")),
        "--lambda-override",
        "0.5",
        "--trace-out",
        path_str(&trace),
    ]);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["outcome"]["bounds_certified"], false);
    assert!(v["outcome"]["final_a_priori"].is_null());
    assert_ne!(v["outcome"]["termination"], "bound-met");
    assert_eq!(code, if v["outcome"]["converged"] == true { 0 } else { 3 });
    let csv = std::fs::read_to_string(&trace).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[2], row[3]), ("", ""));
}

#[test]
fn check_command_reports_witness() {
    let (code, stdout, _) = enfix(&["check", path_str(&corpus("reflection_b050.toml"))]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!((v["max_ratio"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let (code, stdout, _) = enfix(&["check", path_str(&corpus("picard_reflection.toml"))]);
    assert_eq!(code, 3);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["witness"]["x"].as_array().unwrap().len(), 1);

    let (code, _, _) = enfix(&["check", path_str(&corpus("reflection_estimated.toml"))]);
    assert_eq!(code, 1);
}

#[test]
fn seed_flag_changes_sampling_only() {
    let f = corpus("reflection_estimated.toml");
    let (_, a, _) = enfix(&["estimate", path_str(&f)]);
    let (_, b, _) = enfix(&["estimate", path_str(&f), "--seed", "7"]);
    let (a, b): (Value, Value) = (serde_json::from_str(&a).unwrap(), serde_json::from_str(&b).unwrap());
    assert_eq!(a["seed"], 42);
    assert_eq!(b["seed"], 7);
    assert_eq!(a["certificate"]["b"], b["certificate"]["b"]);
}

#[test]
fn grid_csv_has_one_row_per_b() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let (code, _, _) = enfix(&[
        "estimate",
        path_str(&corpus("reflection_estimated.toml")),
        "--b-max",
        "2",
        "--b-step",
        "0.5",
        "--grid-out",
        path_str(&grid),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&grid).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);
}

#[test]
fn json_numbers_round_trip_bit_exactly() {
    for name in ["reflection_b025.toml", "affine_2d_analytic.toml", "maia_pair.toml"] {
        let p = Problem::load(&corpus(name), &Overrides::default()).unwrap();
        let solved = run_problem(&p, false).unwrap();
        let v: Value = serde_json::from_str(&to_json(&solved.report)).unwrap();
        let o = &v["outcome"];
        let f = |x: &Value| x.as_f64().unwrap().to_bits();
        for (i, x) in solved.solve.fixed_point.as_slice().iter().enumerate() {
            assert_eq!(f(&o["fixed_point"][i]), x.to_bits());
        }
        assert_eq!(f(&o["final_step_norm"]), solved.solve.final_step_norm.to_bits());
        assert_eq!(f(&o["final_a_priori"]), solved.solve.final_a_priori.unwrap().to_bits());
        assert_eq!(f(&o["final_a_posteriori"]), solved.solve.final_a_posteriori.unwrap().to_bits());
        assert_eq!(f(&o["final_residual"]), solved.solve.final_residual.to_bits());
        assert_eq!(f(&v["certificate"]["theta"]), solved.report.certificate.theta().to_bits());
        assert_eq!(f(&v["certificate"]["c"]), solved.report.certificate.c().to_bits());
    }
}

#[test]
fn bench_isolates_bad_files_and_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["reflection_b050.toml", "half.toml"] {
        std::fs::copy(corpus(name), dir.path().join(name)).unwrap();
    }
    std::fs::write(dir.path().join("broken.toml"), "[space\n").unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let summary = run_bench(dir.path(), &Overrides::default()).unwrap();
    let files: Vec<_> = summary.rows.iter().map(|r| r.file.as_str()).collect();
    assert_eq!(files, ["broken.toml", "half.toml", "reflection_b050.toml"]);
    assert_eq!(summary.passed, 2);
    assert_eq!(summary.rows[0].termination.as_deref(), Some("parse"));

    let out = tempfile::tempdir().unwrap();
    let (code, stdout, _) = enfix(&["bench", path_str(dir.path()), "--out", path_str(out.path())]);
    assert_eq!(code, 3);
    assert!(stdout.contains("2/3 passed"), "{stdout}");
    assert!(out.path().join("half.json").exists());
    assert!(out.path().join("summary.json").exists());
}

#[test]
fn bench_on_empty_directory_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = enfix(&["bench", path_str(dir.path())]);
    assert_eq!(code, 1);
    assert!(err.contains("no .toml"), "{err}");
}
