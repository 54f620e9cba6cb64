//! Batch runs over a directory of problem files.

use std::io::Write;
use std::path::{Path, PathBuf};

use enfix::{bound_unified, NormSpec, RealVector, SolveReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{run_problem, Solved};
use crate::error::{exit, CliError};
use crate::problem::{Expectation, Overrides, Problem};
use crate::report::to_json;

/// Relative slack allowed when comparing an observed error with a bound.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub file: String,
    pub expect: Option<Expectation>,
    pub passed: bool,
    pub reason: Option<String>,
    pub termination: Option<String>,
    pub iterations: Option<usize>,
    pub c: Option<f64>,
    pub final_error: Option<f64>,
    pub bounds_checked: usize,
    #[serde(skip)]
    pub solved: Option<Solved>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub total: usize,
    pub passed: usize,
    pub rows: Vec<BenchRow>,
}

/// Sorted `*.toml` files directly inside `dir`.
pub fn problem_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("no .toml problem files in {}", dir.display())));
    }
    Ok(files)
}

/// Checks every retained iterate against the a priori, a posteriori and
/// unified (`i = 1..3`) bounds. The absolute floor covers the rounding of
/// the reference point itself. Returns the number of comparisons made.
pub fn check_bounds(report: &SolveReport, spec: &NormSpec, p: &RealVector) -> Result<usize, String> {
    let c = report.certificate.c();
    let floor = 2.0 * f64::EPSILON * (1.0 + spec.norm(p).map_err(|e| e.to_string())?);
    let recs: Vec<_> = report.trace.records().collect();
    let mut checked = 0;
    let within = |err: f64, bound: f64| err <= bound * (1.0 + BOUND_SLACK) + floor;
    for (k, rec) in recs.iter().enumerate() {
        let err = spec.distance(&rec.point, p).map_err(|e| e.to_string())?;
        for (name, bound) in [("a priori", rec.a_priori), ("a posteriori", rec.a_posteriori)] {
            if let Some(bound) = bound {
                checked += 1;
                if !within(err, bound) {
                    return Err(format!("{name} bound {bound:e} < error {err:e} at n = {}", rec.n));
                }
            }
        }
        if rec.a_posteriori.is_none() {
            continue;
        }
        for i in 1..=3 {
            // Only consecutive records: the trace may skip a middle section.
            let Some(later) = recs.get(k + i - 1).filter(|l| l.n == rec.n + i - 1) else {
                break;
            };
            let bound = bound_unified(c, i, rec.step_norm).map_err(|e| e.to_string())?;
            let err = spec.distance(&later.point, p).map_err(|e| e.to_string())?;
            checked += 1;
            if !within(err, bound) {
                return Err(format!("unified bound i = {i} at n = {}: {bound:e} < error {err:e}", rec.n));
            }
        }
    }
    Ok(checked)
}

fn judge(p: &Problem, result: Result<Solved, CliError>) -> BenchRow {
    let mut row = BenchRow {
        file: String::new(),
        expect: Some(p.expect),
        passed: false,
        reason: None,
        termination: None,
        iterations: None,
        c: None,
        final_error: None,
        bounds_checked: 0,
        solved: None,
    };
    let solved = match (p.expect, result) {
        (Expectation::PreconditionFailed, Err(CliError::Precondition(_))) => {
            row.passed = true;
            row.termination = Some("precondition-failed".into());
            return row;
        }
        (_, Err(e)) => {
            row.termination = Some(e.kind().into());
            row.reason = Some(e.to_string());
            return row;
        }
        (_, Ok(s)) => s,
    };
    let out = &solved.report.outcome;
    row.termination = Some(out.termination.to_string());
    row.iterations = Some(out.iterations);
    row.c = Some(solved.report.certificate.c());
    row.final_error = solved.report.reference.as_ref().map(|r| r.error);

    let verdict = match p.expect {
        Expectation::PreconditionFailed => Err("expected a precondition failure".to_owned()),
        Expectation::NotConverged => {
            if out.converged {
                Err(format!("expected no convergence, got {}", out.termination))
            } else {
                Ok(())
            }
        }
        Expectation::Converged => (|| {
            if !out.converged {
                return Err(format!("did not converge: {}", out.termination));
            }
            let reference = p.reference.as_ref().ok_or("converged problems need a [reference]")?;
            let rc = solved.report.reference.as_ref().expect("reference check present");
            if !rc.residual_ok {
                return Err(format!("reference point residual {:e} exceeds its tolerance", rc.residual));
            }
            if out.bounds_certified {
                let spec = &p.norm;
                row.bounds_checked = check_bounds(&solved.solve, spec, &reference.point)?;
                if rc.error > p.tol * (1.0 + BOUND_SLACK) + 2.0 * f64::EPSILON {
                    return Err(format!("final error {:e} exceeds tol {:e}", rc.error, p.tol));
                }
            }
            Ok(())
        })(),
    };
    match verdict {
        Ok(()) => row.passed = true,
        Err(reason) => row.reason = Some(reason),
    }
    row.solved = Some(solved);
    row
}

fn bench_one(path: &Path, overrides: &Overrides) -> BenchRow {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut row = match Problem::load(path, overrides) {
        Ok(p) => {
            let result = run_problem(&p, false);
            judge(&p, result)
        }
        Err(e) => BenchRow {
            file: String::new(),
            expect: None,
            passed: false,
            reason: Some(e.to_string()),
            termination: Some(e.kind().into()),
            iterations: None,
            c: None,
            final_error: None,
            bounds_checked: 0,
            solved: None,
        },
    };
    row.file = file;
    row
}

/// Runs every problem in `dir` in parallel; rows come back in file order.
pub fn run_bench(dir: &Path, overrides: &Overrides) -> Result<BenchSummary, CliError> {
    let files = problem_files(dir)?;
    let rows: Vec<BenchRow> = files.par_iter().map(|f| bench_one(f, overrides)).collect();
    Ok(BenchSummary {
        total: rows.len(),
        passed: rows.iter().filter(|r| r.passed).count(),
        rows,
    })
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "-".into())
}

fn opt_e(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())
}

pub fn table(summary: &BenchSummary) -> String {
    let width = summary.rows.iter().map(|r| r.file.len()).max().unwrap_or(4).max(4);
    let mut s = format!(
        "{:<width$}  {:<6}  {:<22}  {:>6}  {:>10}  {:>10}\n",
        "file", "result", "termination", "iters", "c", "error"
    );
    for r in &summary.rows {
        s.push_str(&format!(
            "{:<width$}  {:<6}  {:<22}  {:>6}  {:>10}  {:>10}\n",
            r.file,
            if r.passed { "pass" } else { "FAIL" },
            opt(&r.termination),
            opt(&r.iterations),
            opt_e(r.c),
            opt_e(r.final_error),
        ));
        if let Some(reason) = r.reason.as_ref().filter(|_| !r.passed) {
            s.push_str(&format!("{:width$}    {reason}\n", ""));
        }
    }
    s.push_str(&format!("{}/{} passed\n", summary.passed, summary.total));
    s
}

/// `bench` subcommand. With `out_dir`, also writes one report per problem
/// plus `summary.json`.
pub fn cmd_bench(dir: &Path, overrides: &Overrides, out_dir: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let summary = run_bench(dir, overrides)?;
    if let Some(d) = out_dir {
        std::fs::create_dir_all(d).map_err(|e| CliError::Io(format!("cannot create {}: {e}", d.display())))?;
        for r in &summary.rows {
            if let Some(s) = &r.solved {
                let name = Path::new(&r.file).with_extension("json");
                std::fs::write(d.join(name), to_json(&s.report)).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        std::fs::write(d.join("summary.json"), to_json(&summary)).map_err(|e| CliError::Io(e.to_string()))?;
    }
    out.write_all(table(&summary).as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(if summary.passed == summary.total { exit::OK } else { exit::NOT_CONVERGED })
}
