//! Subcommand implementations. Each writes its primary output to `out`
//! and returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use enfix::{
    affine_certificate_or_estimate, check_certificate, estimate, solve, solve_asymptotic,
    solve_local, solve_maia, validate_dominance, EnrichmentCertificate, Estimate, SolveConfig,
    SolveError, SolveReport,
};

use crate::error::{exit, CliError};
use crate::problem::{CertificateSource, Mode, Overrides, Problem};
use crate::report::{
    grid_csv, to_json, trace_csv, CheckReport, EstimateReport, Outcome, ReferenceCheck, RunReport,
    Timing, REPORT_VERSION,
};

#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    pub out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
    pub grid_out: Option<PathBuf>,
    pub timing: bool,
}

/// A finished solve: the JSON report, the full solver report, and the exit code.
#[derive(Debug, Clone)]
pub struct Solved {
    pub report: RunReport,
    pub solve: SolveReport,
    pub exit_code: i32,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, target: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match target {
        Some(path) => write_file(path, contents),
        None => out
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write output: {e}"))),
    }
}

fn run_estimate(p: &Problem) -> Result<Estimate, CliError> {
    Ok(estimate(&p.certified_operator, &p.norm, &p.plan, &p.b_grid)?)
}

/// The certificate the solve runs under, declared or computed.
pub fn obtain_certificate(p: &Problem) -> Result<EnrichmentCertificate, CliError> {
    let est = match &p.certificate {
        CertificateSource::Declared(c) => return Ok(c.clone()),
        CertificateSource::Estimate => run_estimate(p)?,
        CertificateSource::Analytic => {
            affine_certificate_or_estimate(&p.certified_operator, &p.norm, &p.b_grid, &p.plan)?
        }
    };
    match est.verdict {
        enfix::Verdict::Certified { certificate } => Ok(certificate),
        enfix::Verdict::NotCertifiable { best } => Err(CliError::NotCertifiable { b: best.b, c: best.c }),
    }
}

fn config(p: &Problem) -> SolveConfig {
    let mut cfg = SolveConfig::new(p.x0.clone(), p.tol);
    if let Some(n) = p.max_iter {
        cfg = cfg.max_iter(n);
    }
    if let Some(l) = p.lambda_override {
        cfg = cfg.lambda_override(l);
    }
    cfg
}

/// Runs a validated problem end to end.
pub fn run_problem(p: &Problem, timing: bool) -> Result<Solved, CliError> {
    let started = Instant::now();
    let cert = obtain_certificate(p)?;
    let cfg = config(p);
    let mut dominance = None;
    let result = match &p.mode {
        Mode::Global => solve(&p.operator, &cert, &p.norm, &cfg),
        Mode::Local { radius } => solve_local(&p.operator, &cert, &p.norm, &cfg, *radius),
        Mode::Asymptotic { exponent } => solve_asymptotic(&p.operator, *exponent, &cert, &p.norm, &cfg),
        Mode::Maia { samples, .. } => {
            let pair = p.norm_pair().expect("maia mode has a norm pair");
            let verdict = validate_dominance(&pair, p.dim, *samples, p.seed)?;
            if !verdict.passed {
                return Err(CliError::Precondition(format!(
                    "norm dominance ‖·‖_d ≤ ‖·‖_ρ failed: worst ratio {} at {:?}",
                    verdict.worst_ratio,
                    verdict.witness.as_slice()
                )));
            }
            let r = solve_maia(&p.operator, &cert, &verdict, &cfg);
            dominance = Some(verdict);
            r
        }
    };
    let (solve_report, back_ok) = match result {
        Ok(r) => {
            let ok = matches!(p.mode, Mode::Asymptotic { .. }) && r.termination.converged();
            (r, ok.then_some(true))
        }
        Err(SolveError::BackVerificationFailed { report, .. }) => (*report, Some(false)),
        Err(e) => return Err(e.into()),
    };

    let reference = match &p.reference {
        Some(r) => {
            let (residual_ok, residual) = r.verify(&p.operator, &p.norm).map_err(SolveError::from)?;
            let error = p.norm.distance(&solve_report.fixed_point, &r.point)?;
            Some(ReferenceCheck {
                point: r.point.clone(),
                residual,
                residual_ok,
                error,
            })
        }
        None => None,
    };
    let outcome = Outcome::from_report(&solve_report, back_ok);
    let exit_code = if outcome.converged { exit::OK } else { exit::NOT_CONVERGED };
    let report = RunReport {
        version: REPORT_VERSION,
        command: "solve",
        seed: p.seed,
        problem: p.file.clone(),
        certificate: cert,
        dominance,
        outcome,
        reference,
        timing: timing.then(|| Timing {
            elapsed_seconds: started.elapsed().as_secs_f64(),
        }),
    };
    Ok(Solved {
        report,
        solve: solve_report,
        exit_code,
    })
}

pub fn cmd_solve(path: &Path, overrides: &Overrides, opts: &OutputOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    let p = Problem::load(path, overrides)?;
    let solved = run_problem(&p, opts.timing)?;
    if let Some(t) = &opts.trace_out {
        write_file(t, &trace_csv(&solved.solve.trace))?;
    }
    emit(out, opts.out.as_deref(), &to_json(&solved.report))?;
    Ok(solved.exit_code)
}

pub fn cmd_estimate(path: &Path, overrides: &Overrides, opts: &OutputOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    let p = Problem::load(path, overrides)?;
    let est = run_estimate(&p)?;
    if let Some(g) = &opts.grid_out {
        write_file(g, &grid_csv(&est.grid))?;
    }
    let report = EstimateReport::new(p.seed, p.plan.pair_count(), &est);
    emit(out, opts.out.as_deref(), &to_json(&report))?;
    Ok(if report.certificate.is_some() { exit::OK } else { exit::NOT_CERTIFIABLE })
}

pub fn cmd_check(path: &Path, overrides: &Overrides, opts: &OutputOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    let p = Problem::load(path, overrides)?;
    let cert = match &p.certificate {
        CertificateSource::Declared(c) => c.clone(),
        _ => {
            return Err(CliError::Usage(
                "check needs a declared certificate (certificate.b and certificate.theta)".into(),
            ))
        }
    };
    let check = check_certificate(&p.certified_operator, &cert, &p.norm, &p.plan)?;
    let report = CheckReport::new(p.seed, &cert, check);
    emit(out, opts.out.as_deref(), &to_json(&report))?;
    Ok(if report.passed { exit::OK } else { exit::NOT_CONVERGED })
}
