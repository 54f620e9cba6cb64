//! JSON run reports and CSV traces.

use std::fmt::Write as _;

use enfix::{
    CertificateCheck, DominanceVerdict, EnrichmentCertificate, Estimate, GridPoint, IterationTrace,
    RealVector, SolveMode, SolveReport, Termination,
};
use serde::Serialize;

use crate::problem::ProblemFile;

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub problem: ProblemFile,
    pub certificate: EnrichmentCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominance: Option<DominanceVerdict>,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub mode: SolveMode,
    pub termination: Termination,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub fixed_point: RealVector,
    pub iterations: usize,
    pub lambda: f64,
    pub final_step_norm: f64,
    pub final_a_priori: Option<f64>,
    pub final_a_posteriori: Option<f64>,
    pub error_bound: Option<f64>,
    pub final_residual: f64,
    pub bounds_certified: bool,
    pub contraction_violations: usize,
    pub back_verification: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub back_verification_passed: Option<bool>,
    pub trace_records: usize,
    pub trace_truncated: bool,
}

impl Outcome {
    pub fn from_report(r: &SolveReport, back_verification_passed: Option<bool>) -> Self {
        Outcome {
            mode: r.mode.clone(),
            termination: r.termination,
            converged: r.termination.converged() && back_verification_passed != Some(false),
            detail: r.detail.clone(),
            fixed_point: r.fixed_point.clone(),
            iterations: r.iterations,
            lambda: r.lambda,
            final_step_norm: r.final_step_norm,
            final_a_priori: r.final_a_priori,
            final_a_posteriori: r.final_a_posteriori,
            error_bound: r.error_bound(),
            final_residual: r.final_residual,
            bounds_certified: r.bounds_certified,
            contraction_violations: r.contraction_violations,
            back_verification: r.back_verification,
            back_verification_passed,
            trace_records: r.trace.len(),
            trace_truncated: r.trace.is_truncated(),
        }
    }
}

/// Distance from the returned point to the problem's reference point.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceCheck {
    pub point: RealVector,
    pub residual: f64,
    pub residual_ok: bool,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub pairs: usize,
    pub grid_points: usize,
    pub status: &'static str,
    pub certificate: Option<EnrichmentCertificate>,
    pub best: GridPoint,
}

impl EstimateReport {
    pub fn new(seed: u64, pairs: usize, est: &Estimate) -> Self {
        let certificate = est.certificate().cloned();
        let best = match &est.verdict {
            enfix::Verdict::NotCertifiable { best } => *best,
            enfix::Verdict::Certified { certificate } => est
                .grid
                .iter()
                .copied()
                .find(|g| g.b == certificate.b())
                .expect("certified b is on the grid"),
        };
        EstimateReport {
            version: REPORT_VERSION,
            command: "estimate",
            seed,
            pairs,
            grid_points: est.grid.len(),
            status: if certificate.is_some() { "certified" } else { "not_certifiable" },
            certificate,
            best,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub b: f64,
    pub theta: f64,
    pub passed: bool,
    pub max_ratio: f64,
    pub pairs_used: usize,
    pub witness: Witness,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub x: RealVector,
    pub y: RealVector,
}

impl CheckReport {
    pub fn new(seed: u64, cert: &EnrichmentCertificate, check: CertificateCheck) -> Self {
        CheckReport {
            version: REPORT_VERSION,
            command: "check",
            seed,
            b: cert.b(),
            theta: cert.theta(),
            passed: check.passed,
            max_ratio: check.max_ratio,
            pairs_used: check.pairs_used,
            witness: Witness {
                x: check.witness.0,
                y: check.witness.1,
            },
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn num(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        write!(out, "{v:.16e}").unwrap();
    }
}

pub const TRACE_HEADER: &str = "n,step_norm,a_priori,a_posteriori,residual";

/// One row per retained record; bounds are empty when uncertified.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace.records() {
        write!(out, "{},", r.n).unwrap();
        num(&mut out, Some(r.step_norm));
        out.push(',');
        num(&mut out, r.a_priori);
        out.push(',');
        num(&mut out, r.a_posteriori);
        out.push(',');
        num(&mut out, Some(r.residual));
        out.push('\n');
    }
    out
}

pub fn grid_csv(grid: &[GridPoint]) -> String {
    let mut out = String::from("b,theta_hat,c\n");
    for g in grid {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", g.b, g.theta_hat, g.c).unwrap();
    }
    out
}
