//! Averaged (Krasnoselskij) iteration with certified error bounds.
//!
//! Given a `(b, θ)` certificate the solver runs Picard iteration on the
//! averaged map `T_λ`, `λ = 1/(b + 1)`:
//!
//! ```text
//! x_{n+1} = (1 − λ)x_n + λT(x_n)
//! ```
//!
//! `T_λ` contracts with factor `c = θ/(b + 1)`, which gives for `n ≥ 1`
//!
//! ```text
//! ‖x_n − p‖ ≤ cⁿ/(1 − c) · ‖x_1 − x_0‖          (a priori)
//! ‖x_n − p‖ ≤ c/(1 − c)  · ‖x_n − x_{n−1}‖      (a posteriori)
//! ‖x_{n+i−1} − p‖ ≤ cⁱ/(1 − c) · ‖x_n − x_{n−1}‖ (unified, i ≥ 1)
//! ```
//!
//! The run stops once the smaller of the first two bounds drops to `tol`, so
//! `tol` is a guarantee on the distance to the fixed point and not a step
//! heuristic. The guarantee is only as good as the certificate: every step is
//! checked against `‖x_{n+1} − x_n‖ ≤ c‖x_n − x_{n−1}‖` and a single violation
//! withdraws the right to stop on the bounds.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::enrichment::EnrichmentCertificate;
use crate::operators::{average_step, Operator, OperatorError};
use crate::spaces::{DominanceVerdict, NormSpec, RealVector, SpaceError};

/// Relative slack on step-ratio checks.
pub const STEP_SLACK: f64 = 1e-9;
/// Consecutive step increases that mark a run as diverged.
pub const DIVERGENCE_RUN: usize = 3;
pub const MAX_ITER_CAP: usize = 1_000_000;
/// Traces keep every record up to this many iterations.
pub const DEFAULT_TRACE_CAP: usize = 10_000;
/// Head and tail length kept once a trace overflows its cap.
pub const TRACE_KEEP: usize = 100;
/// Relative slack on the local-mode ball radius.
pub const BALL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("contraction factor must satisfy 0 ≤ c < 1, got {0}")]
    BadFactor(f64),
    #[error("invalid solve configuration: {0}")]
    BadConfig(String),
    #[error("local admission failed: ‖Tx0 − x0‖ = {displacement} is not below (b + 1 − θ)·r = {limit}")]
    PreconditionFailed { displacement: f64, limit: f64 },
    #[error("norm dominance ‖·‖_d ≤ ‖·‖_ρ failed (worst ratio {worst_ratio})")]
    DominanceFailed { worst_ratio: f64 },
    #[error("back-verification failed: ‖U(p) − p‖ = {residual} exceeds {limit}")]
    BackVerificationFailed {
        residual: f64,
        limit: f64,
        report: Box<SolveReport>,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

fn check_factor(c: f64) -> Result<(), SolveError> {
    if (0.0..1.0).contains(&c) {
        Ok(())
    } else {
        Err(SolveError::BadFactor(c))
    }
}

/// `cⁿ/(1 − c) · ‖x_1 − x_0‖`.
pub fn bound_a_priori(c: f64, n: usize, first_step: f64) -> Result<f64, SolveError> {
    check_factor(c)?;
    if n == 0 {
        return Err(SolveError::BadConfig("a priori bound needs n ≥ 1".into()));
    }
    Ok(powi(c, n) / (1.0 - c) * first_step)
}

/// `c/(1 − c) · ‖x_n − x_{n−1}‖`.
pub fn bound_a_posteriori(c: f64, last_step: f64) -> Result<f64, SolveError> {
    check_factor(c)?;
    Ok(c / (1.0 - c) * last_step)
}

/// `cⁱ/(1 − c) · ‖x_n − x_{n−1}‖`, bounding `‖x_{n+i−1} − p‖`.
pub fn bound_unified(c: f64, i: usize, step_at_n: f64) -> Result<f64, SolveError> {
    check_factor(c)?;
    if i == 0 {
        return Err(SolveError::BadConfig("unified bound needs i ≥ 1".into()));
    }
    Ok(powi(c, i) / (1.0 - c) * step_at_n)
}

fn powi(c: f64, n: usize) -> f64 {
    c.powi(i32::try_from(n).unwrap_or(i32::MAX))
}

/// Iteration count the a priori bound predicts, plus a margin of 10.
pub fn default_max_iter(c: f64, tol: f64, first_step: f64) -> usize {
    if c <= 0.0 || first_step == 0.0 {
        return 2;
    }
    let predicted = ((tol * (1.0 - c) / first_step).ln() / c.ln()).ceil();
    let n = if predicted.is_finite() { predicted.max(0.0) } else { MAX_ITER_CAP as f64 };
    ((n as usize).saturating_add(10)).clamp(1, MAX_ITER_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Target on `‖x_n − p‖`.
    pub tol: f64,
    /// `None` picks [`default_max_iter`] after the first step.
    pub max_iter: Option<usize>,
    pub x0: RealVector,
    pub trace_cap: usize,
    /// Replaces the certified `λ`. Bounds are not computed when set.
    pub lambda_override: Option<f64>,
}

impl SolveConfig {
    pub fn new(x0: RealVector, tol: f64) -> Self {
        SolveConfig {
            tol,
            max_iter: None,
            x0,
            trace_cap: DEFAULT_TRACE_CAP,
            lambda_override: None,
        }
    }

    pub fn max_iter(mut self, n: usize) -> Self {
        self.max_iter = Some(n);
        self
    }

    pub fn lambda_override(mut self, lambda: f64) -> Self {
        self.lambda_override = Some(lambda);
        self
    }

    pub fn trace_cap(mut self, cap: usize) -> Self {
        self.trace_cap = cap;
        self
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(SolveError::BadConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(SolveError::BadConfig("max_iter must be at least 1".into()));
        }
        if self.trace_cap < 2 * TRACE_KEEP {
            return Err(SolveError::BadConfig(format!(
                "trace_cap must be at least {}",
                2 * TRACE_KEEP
            )));
        }
        if let Some(l) = self.lambda_override {
            if !(l > 0.0 && l <= 1.0) {
                return Err(SolveError::BadConfig(format!("lambda override {l} outside (0, 1]")));
            }
        }
        self.x0.check_finite()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    BoundMet,
    ResidualZero,
    MaxIter,
    Diverged,
    EscapedBall,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::BoundMet | Termination::ResidualZero)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::BoundMet => "bound-met",
            Termination::ResidualZero => "residual-zero",
            Termination::MaxIter => "max-iter",
            Termination::Diverged => "diverged",
            Termination::EscapedBall => "escaped-ball",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    pub point: RealVector,
    /// `‖x_n − x_{n−1}‖` in the driving norm.
    pub step_norm: f64,
    pub a_priori: Option<f64>,
    pub a_posteriori: Option<f64>,
    /// `‖T(x_n) − x_n‖` in the driving norm.
    pub residual: f64,
    /// Step measured in the second norm of a two-norm run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_norm_d: Option<f64>,
}

/// Iteration records; full up to `cap`, then the first and last
/// [`TRACE_KEEP`] records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    cap: usize,
    total: usize,
    head: Vec<IterationRecord>,
    tail: VecDeque<IterationRecord>,
}

impl IterationTrace {
    pub fn new(cap: usize) -> Self {
        IterationTrace {
            cap,
            total: 0,
            head: Vec::new(),
            tail: VecDeque::new(),
        }
    }

    pub fn push(&mut self, rec: IterationRecord) {
        self.total += 1;
        if self.total <= self.cap {
            self.head.push(rec);
            return;
        }
        if self.tail.is_empty() {
            let keep_from = self.head.len() - (TRACE_KEEP - 1);
            self.tail.extend(self.head.drain(keep_from..));
            self.head.truncate(TRACE_KEEP);
        }
        self.tail.push_back(rec);
        while self.tail.len() > TRACE_KEEP {
            self.tail.pop_front();
        }
    }

    /// Iterations pushed, retained or not.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_truncated(&self) -> bool {
        self.total > self.cap
    }

    pub fn records(&self) -> impl Iterator<Item = &IterationRecord> {
        self.head.iter().chain(self.tail.iter())
    }

    pub fn len(&self) -> usize {
        self.head.len() + self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.tail.back().or(self.head.last())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveMode {
    Global,
    Local { radius: f64, epsilon: f64 },
    Asymptotic { exponent: u32 },
    Maia { d: NormSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub fixed_point: RealVector,
    pub iterations: usize,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub final_step_norm: f64,
    pub final_a_priori: Option<f64>,
    pub final_a_posteriori: Option<f64>,
    /// Base-operator residual `‖T(p) − p‖` at the returned point.
    pub final_residual: f64,
    pub certificate: EnrichmentCertificate,
    pub lambda: f64,
    /// False when `λ` was overridden or a step broke the contraction check.
    pub bounds_certified: bool,
    pub contraction_violations: usize,
    /// `‖U(p) − p‖` in asymptotic mode, `‖T(p) − p‖_d` in two-norm mode.
    pub back_verification: Option<f64>,
    pub trace: IterationTrace,
}

impl SolveReport {
    /// `min(a priori, a posteriori)` at the last iteration.
    pub fn error_bound(&self) -> Option<f64> {
        match (self.final_a_priori, self.final_a_posteriori) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

struct Ball<'a> {
    center: &'a RealVector,
    epsilon: f64,
}

struct Run<'a> {
    op: &'a Operator,
    cert: &'a EnrichmentCertificate,
    norm: &'a NormSpec,
    second: Option<&'a NormSpec>,
    ball: Option<Ball<'a>>,
    mode: SolveMode,
}

impl Run<'_> {
    fn execute(self, cfg: &SolveConfig, tx0: Option<RealVector>) -> Result<SolveReport, SolveError> {
        cfg.validate()?;
        check_factor(self.cert.c())?;
        let dim = self.op.dim();
        cfg.x0.check_dim(dim)?;
        self.norm.check_dim(dim)?;
        if let Some(d) = self.second {
            d.check_dim(dim)?;
        }

        let lambda = cfg.lambda_override.unwrap_or(self.cert.lambda());
        let certified = cfg.lambda_override.is_none();
        let c = self.cert.c();

        let mut x = cfg.x0.clone();
        let mut tx = match tx0 {
            Some(t) => t,
            None => self.op.evaluate(&x)?,
        };
        let mut trace = IterationTrace::new(cfg.trace_cap);
        let mut max_iter = cfg.max_iter.unwrap_or(MAX_ITER_CAP);
        let mut first_step = 0.0;
        let mut prev_step: Option<f64> = None;
        let mut increases = 0;
        let mut violations = 0;
        let mut detail = None;
        let mut last = (0.0, None, None);

        let termination = 'run: {
            for n in 1.. {
                let next = average_step(&x, &tx, lambda)?;
                if !next.is_finite() {
                    detail = Some(format!("non-finite iterate at n = {n}"));
                    break 'run Termination::Diverged;
                }
                let t_next = match self.op.evaluate(&next) {
                    Ok(v) => v,
                    Err(OperatorError::NonFiniteOutput { .. }) => {
                        detail = Some(format!("operator overflowed at iterate n = {n}"));
                        break 'run Termination::Diverged;
                    }
                    Err(e) => return Err(e.into()),
                };
                let step = self.norm.distance(&next, &x)?;
                let residual = self.norm.distance(&t_next, &next)?;
                if n == 1 {
                    first_step = step;
                    if cfg.max_iter.is_none() {
                        max_iter = default_max_iter(c, cfg.tol, step);
                    }
                }
                let (a_priori, a_posteriori) = if certified {
                    (
                        Some(bound_a_priori(c, n, first_step)?),
                        Some(bound_a_posteriori(c, step)?),
                    )
                } else {
                    (None, None)
                };
                if let Some(prev) = prev_step {
                    if step > prev * (1.0 + STEP_SLACK) {
                        increases += 1;
                    } else {
                        increases = 0;
                    }
                    // Absolute floor keeps rounding noise near the fixed point from counting.
                    let floor = 8.0 * f64::EPSILON * (1.0 + self.norm.norm(&next)?);
                    if step > c * prev * (1.0 + STEP_SLACK) + floor {
                        violations += 1;
                    }
                }
                let step_norm_d = match self.second {
                    Some(d) => Some(d.distance(&next, &x)?),
                    None => None,
                };
                trace.push(IterationRecord {
                    n,
                    point: next.clone(),
                    step_norm: step,
                    a_priori,
                    a_posteriori,
                    residual,
                    step_norm_d,
                });
                last = (step, a_priori, a_posteriori);
                x = next;
                tx = t_next;
                prev_step = Some(step);

                if let Some(ball) = &self.ball {
                    let dist = self.norm.distance(&x, ball.center)?;
                    if dist > ball.epsilon * (1.0 + BALL_SLACK) {
                        detail = Some(format!(
                            "iterate {n} at distance {dist} from the centre, radius {}",
                            ball.epsilon
                        ));
                        break 'run Termination::EscapedBall;
                    }
                }
                if step == 0.0 {
                    break 'run Termination::ResidualZero;
                }
                if certified && violations == 0 {
                    let bound = a_priori.unwrap().min(a_posteriori.unwrap());
                    if bound <= cfg.tol {
                        break 'run Termination::BoundMet;
                    }
                }
                if increases >= DIVERGENCE_RUN {
                    detail = Some(format!("{DIVERGENCE_RUN} consecutive step increases"));
                    break 'run Termination::Diverged;
                }
                if n >= max_iter {
                    break 'run Termination::MaxIter;
                }
            }
            unreachable!()
        };

        let final_residual = self.norm.distance(&tx, &x)?;
        let back_verification = match self.second {
            Some(d) => Some(d.distance(&tx, &x)?),
            None => None,
        };
        Ok(SolveReport {
            mode: self.mode,
            fixed_point: x,
            iterations: trace.total(),
            termination,
            detail,
            final_step_norm: last.0,
            final_a_priori: last.1,
            final_a_posteriori: last.2,
            final_residual,
            certificate: self.cert.clone(),
            lambda,
            bounds_certified: certified && violations == 0,
            contraction_violations: violations,
            back_verification,
            trace,
        })
    }
}

/// Averaged iteration on `op` from `cfg.x0`.
pub fn solve(
    op: &Operator,
    cert: &EnrichmentCertificate,
    spec: &NormSpec,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    Run {
        op,
        cert,
        norm: spec,
        second: None,
        ball: None,
        mode: SolveMode::Global,
    }
    .execute(cfg, None)
}

/// Ball-restricted solve around `cfg.x0`.
///
/// Admits the problem only if `‖Tx0 − x0‖ < (b + 1 − θ)·radius`, then takes
/// `ε = ‖Tx0 − x0‖/(b + 1 − θ)`. The closed ball of radius `ε` about `x0` is
/// invariant under `T_λ`; an iterate leaving it ends the run with
/// [`Termination::EscapedBall`].
pub fn solve_local(
    op: &Operator,
    cert: &EnrichmentCertificate,
    spec: &NormSpec,
    cfg: &SolveConfig,
    radius: f64,
) -> Result<SolveReport, SolveError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(SolveError::BadConfig(format!("radius must be positive, got {radius}")));
    }
    cfg.validate()?;
    cfg.x0.check_dim(op.dim())?;
    let tx0 = op.evaluate(&cfg.x0)?;
    let displacement = spec.distance(&tx0, &cfg.x0)?;
    let margin = cert.b() + 1.0 - cert.theta();
    let limit = margin * radius;
    if displacement >= limit {
        return Err(SolveError::PreconditionFailed {
            displacement,
            limit,
        });
    }
    let epsilon = displacement / margin;
    let mode = SolveMode::Local { radius, epsilon };
    if displacement == 0.0 {
        return Ok(SolveReport {
            mode,
            fixed_point: cfg.x0.clone(),
            iterations: 0,
            termination: Termination::ResidualZero,
            detail: None,
            final_step_norm: 0.0,
            final_a_priori: None,
            final_a_posteriori: None,
            final_residual: 0.0,
            certificate: cert.clone(),
            lambda: cfg.lambda_override.unwrap_or(cert.lambda()),
            bounds_certified: cfg.lambda_override.is_none(),
            contraction_violations: 0,
            back_verification: None,
            trace: IterationTrace::new(cfg.trace_cap),
        });
    }
    Run {
        op,
        cert,
        norm: spec,
        second: None,
        ball: Some(Ball {
            center: &cfg.x0,
            epsilon,
        }),
        mode,
    }
    .execute(cfg, Some(tx0))
}

/// Solves with `U^N` (certified by `cert`) and back-checks `U(p) = p`.
///
/// A converged run whose `‖U(p) − p‖` exceeds `tol·(1 + c)/(1 − c)` (plus
/// rounding slack) is rejected with [`SolveError::BackVerificationFailed`].
pub fn solve_asymptotic(
    u: &Operator,
    exponent: u32,
    cert: &EnrichmentCertificate,
    spec: &NormSpec,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    let power = u.power(exponent)?;
    let mut report = Run {
        op: &power,
        cert,
        norm: spec,
        second: None,
        ball: None,
        mode: SolveMode::Asymptotic { exponent },
    }
    .execute(cfg, None)?;
    let p = &report.fixed_point;
    let back = spec.distance(&u.evaluate(p)?, p)?;
    let c = cert.c();
    let limit = cfg.tol * (1.0 + c) / (1.0 - c) + 1e-12 * (1.0 + spec.norm(p)?);
    report.back_verification = Some(back);
    if report.termination.converged() && back > limit {
        return Err(SolveError::BackVerificationFailed {
            residual: back,
            limit,
            report: Box::new(report),
        });
    }
    Ok(report)
}

/// Two-norm solve: `cert_rho` certifies `op` under `ρ`, which drives the
/// bounds and stopping rule; the `d` norm is reported alongside and the
/// final `‖T(p) − p‖_d` lands in `back_verification`.
pub fn solve_maia(
    op: &Operator,
    cert_rho: &EnrichmentCertificate,
    dominance: &DominanceVerdict,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    if !dominance.passed {
        return Err(SolveError::DominanceFailed {
            worst_ratio: dominance.worst_ratio,
        });
    }
    let pair = &dominance.pair;
    Run {
        op,
        cert: cert_rho,
        norm: &pair.rho,
        second: Some(&pair.d),
        ball: None,
        mode: SolveMode::Maia { d: pair.d.clone() },
    }
    .execute(cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Matrix;
    use crate::spaces::{validate_dominance, NormKind, NormPair};
    use approx::assert_abs_diff_eq;

    fn s(x: f64) -> RealVector {
        RealVector::scalar(x).unwrap()
    }

    fn cert(b: f64, theta: f64) -> EnrichmentCertificate {
        EnrichmentCertificate::declared(b, theta).unwrap()
    }

    #[test]
    fn bound_examples() {
        assert_eq!(bound_a_priori(0.5, 3, 0.5).unwrap(), 0.125);
        assert_eq!(bound_a_priori(0.0, 7, 3.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bound_a_priori(1.0 / 3.0, 1, 2.0 / 3.0).unwrap(), 1.0 / 3.0, epsilon = 1e-16);
        assert_eq!(bound_a_posteriori(0.5, 0.25).unwrap(), 0.25);
        assert_eq!(bound_a_posteriori(0.0, 9.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bound_a_posteriori(1.0 / 3.0, 2.0 / 9.0).unwrap(), 1.0 / 9.0, epsilon = 1e-16);
        assert_eq!(
            bound_unified(0.3, 1, 0.7).unwrap(),
            bound_a_posteriori(0.3, 0.7).unwrap()
        );
        // (1/3)²/(2/3)·(2/3) = 1/9; the true error |x_2 − p| = 1/18 sits below it.
        assert_abs_diff_eq!(bound_unified(1.0 / 3.0, 2, 2.0 / 3.0).unwrap(), 1.0 / 9.0, epsilon = 1e-16);
        assert_eq!(bound_unified(0.0, 4, 1.0).unwrap(), 0.0);
        for c in [1.0, 1.5, -0.1] {
            assert_eq!(bound_a_priori(c, 1, 1.0), Err(SolveError::BadFactor(c)));
            assert_eq!(bound_a_posteriori(c, 1.0), Err(SolveError::BadFactor(c)));
            assert_eq!(bound_unified(c, 1, 1.0), Err(SolveError::BadFactor(c)));
        }
    }

    #[test]
    fn default_max_iter_follows_a_priori_prediction() {
        // 0.5ⁿ/0.5 ≤ 1e−3 needs n = 11.
        assert_eq!(default_max_iter(0.5, 1e-3, 1.0), 11 + 10);
        assert_eq!(default_max_iter(0.0, 1e-3, 1.0), 2);
        assert_eq!(default_max_iter(1.0 - 1e-15, 1e-300, 1.0), MAX_ITER_CAP);
    }

    #[test]
    fn reflection_with_zero_factor_finishes_at_once() {
        let cfg = SolveConfig::new(s(0.0), 1e-10);
        let r = solve(&Operator::reflection(), &cert(1.0, 0.0), &NormSpec::l2(), &cfg).unwrap();
        assert_eq!(r.fixed_point, s(0.5));
        assert!(r.iterations <= 2);
        assert!(r.termination.converged());
    }

    #[test]
    fn reflection_third_factor_hand_iterates() {
        let cfg = SolveConfig::new(s(0.0), 1e-10);
        let r = solve(&Operator::reflection(), &cert(0.5, 0.5), &NormSpec::l2(), &cfg).unwrap();
        let pts: Vec<f64> = r.trace.records().take(3).map(|rec| rec.point[0]).collect();
        assert_abs_diff_eq!(pts[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pts[1], 4.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pts[2], 14.0 / 27.0, epsilon = 1e-15);
        assert_eq!(r.termination, Termination::BoundMet);
        assert!(r.iterations <= 30);
        assert!((r.fixed_point[0] - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn misdeclared_picard_certificate_never_claims_convergence() {
        let cfg = SolveConfig::new(s(0.0), 1e-10).max_iter(500);
        let r = solve(&Operator::reflection(), &cert(0.0, 0.9), &NormSpec::l2(), &cfg).unwrap();
        assert_eq!(r.termination, Termination::MaxIter);
        assert!(!r.bounds_certified);
        assert!(r.contraction_violations > 0);
    }

    #[test]
    fn increasing_steps_are_diverged() {
        let double = Operator::linear(Matrix::scaled_identity(1, 2.0));
        let cfg = SolveConfig::new(s(1.0), 1e-10).max_iter(100);
        let r = solve(&double, &cert(0.0, 0.5), &NormSpec::l2(), &cfg).unwrap();
        assert_eq!(r.termination, Termination::Diverged);
        assert_eq!(r.iterations, 4);
    }

    #[test]
    fn overflow_is_diverged_with_detail() {
        let big = Operator::linear(Matrix::scaled_identity(1, 1e200));
        let cfg = SolveConfig::new(s(1.0), 1e-10).max_iter(100);
        let r = solve(&big, &cert(0.0, 0.5), &NormSpec::l2(), &cfg).unwrap();
        assert_eq!(r.termination, Termination::Diverged);
        assert!(r.detail.unwrap().contains("overflow"));
    }

    #[test]
    fn config_validation() {
        let op = Operator::reflection();
        let c = cert(1.0, 0.0);
        let l2 = NormSpec::l2();
        assert!(solve(&op, &c, &l2, &SolveConfig::new(s(0.0), 0.0)).is_err());
        assert!(solve(&op, &c, &l2, &SolveConfig::new(s(0.0), 1e-3).max_iter(0)).is_err());
        assert!(solve(&op, &c, &l2, &SolveConfig::new(s(0.0), 1e-3).lambda_override(0.0)).is_err());
        let two = RealVector::new(vec![0.0, 0.0]).unwrap();
        assert!(solve(&op, &c, &l2, &SolveConfig::new(two, 1e-3)).is_err());
    }

    #[test]
    fn lambda_override_disables_bounds() {
        let cfg = SolveConfig::new(s(0.0), 1e-10).max_iter(50).lambda_override(1.0);
        let r = solve(&Operator::reflection(), &cert(1.0, 0.0), &NormSpec::l2(), &cfg).unwrap();
        assert_eq!(r.termination, Termination::MaxIter);
        assert!(r.trace.records().all(|rec| rec.a_priori.is_none() && rec.step_norm == 1.0));
        assert!(!r.bounds_certified);
    }

    #[test]
    fn local_examples() {
        let r = Operator::reflection();
        let l2 = NormSpec::l2();
        let rep = solve_local(&r, &cert(1.0, 0.0), &l2, &SolveConfig::new(s(0.4), 1e-10), 0.2).unwrap();
        match rep.mode {
            SolveMode::Local { epsilon, .. } => assert_abs_diff_eq!(epsilon, 0.1, epsilon = 1e-15),
            _ => unreachable!(),
        }
        assert_abs_diff_eq!(rep.fixed_point[0], 0.5, epsilon = 1e-15);

        let err = solve_local(&r, &cert(1.0, 0.0), &l2, &SolveConfig::new(s(0.0), 1e-10), 0.2)
            .unwrap_err();
        assert_eq!(
            err,
            SolveError::PreconditionFailed {
                displacement: 1.0,
                limit: 0.4
            }
        );

        let rep = solve_local(&r, &cert(1.0, 0.0), &l2, &SolveConfig::new(s(0.5), 1e-10), 0.2).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.fixed_point, s(0.5));
        assert_eq!(rep.termination, Termination::ResidualZero);
    }

    #[test]
    fn local_escape_detected() {
        // A false certificate (b = 0, θ = 0.5) for x ↦ 2x admits x0 = 1 with ε = 2,
        // then the second iterate lands at distance 3.
        let double = Operator::linear(Matrix::scaled_identity(1, 2.0));
        let rep = solve_local(&double, &cert(0.0, 0.5), &NormSpec::l2(), &SolveConfig::new(s(1.0), 1e-12), 3.0)
            .unwrap();
        assert_eq!(rep.termination, Termination::EscapedBall);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn asymptotic_threshold() {
        let u = Operator::threshold(2.0, 0.0, -1.0 / 3.0).unwrap();
        let rep = solve_asymptotic(&u, 2, &cert(0.0, 0.0), &NormSpec::l2(), &SolveConfig::new(s(5.0), 1e-10))
            .unwrap();
        assert_eq!(rep.fixed_point, s(0.0));
        assert_eq!(rep.back_verification, Some(0.0));
    }

    #[test]
    fn asymptotic_back_verification_catches_wrong_certificate() {
        // U swaps the sign, so U² = I; a (0, 0) certificate for U² is a lie and
        // the "fixed point" x0 is not fixed by U.
        let u = Operator::linear(Matrix::scaled_identity(1, -1.0));
        let err = solve_asymptotic(&u, 2, &cert(0.0, 0.0), &NormSpec::l2(), &SolveConfig::new(s(3.0), 1e-10))
            .unwrap_err();
        assert!(matches!(err, SolveError::BackVerificationFailed { .. }));
    }

    #[test]
    fn maia_affine_pair() {
        let a = Matrix::from_rows(vec![vec![0.0, 0.4], vec![0.4, 0.0]]).unwrap();
        let op = Operator::linear(a);
        let pair = NormPair::new(NormSpec::l2(), NormSpec::l1());
        let dom = validate_dominance(&pair, 2, 1000, 42).unwrap();
        let x0 = RealVector::new(vec![1.0, -2.0]).unwrap();
        let rep = solve_maia(&op, &cert(0.0, 0.4), &dom, &SolveConfig::new(x0, 1e-12)).unwrap();
        assert_eq!(rep.termination, Termination::BoundMet);
        assert!(rep.back_verification.unwrap() <= 1e-10);
        assert!(rep.trace.records().all(|r| r.step_norm_d.unwrap() <= r.step_norm));

        let swapped = validate_dominance(&NormPair::new(NormSpec::l1(), NormSpec::l2()), 2, 100, 42).unwrap();
        let x0 = RealVector::new(vec![1.0, -2.0]).unwrap();
        assert!(matches!(
            solve_maia(&op, &cert(0.0, 0.4), &swapped, &SolveConfig::new(x0, 1e-12)),
            Err(SolveError::DominanceFailed { .. })
        ));
    }

    #[test]
    fn maia_scaled_reflection() {
        let rho = NormSpec::weighted(NormKind::L2, vec![2.0]).unwrap();
        let dom = validate_dominance(&NormPair::new(NormSpec::l2(), rho), 1, 100, 42).unwrap();
        let rep = solve_maia(&Operator::reflection(), &cert(1.0, 0.0), &dom, &SolveConfig::new(s(0.0), 1e-10))
            .unwrap();
        assert_eq!(rep.fixed_point, s(0.5));
        assert_eq!(rep.final_residual, 0.0);
        assert_eq!(rep.back_verification, Some(0.0));
    }

    #[test]
    fn trace_keeps_head_and_tail() {
        let mut t = IterationTrace::new(250);
        for n in 1..=1000 {
            t.push(IterationRecord {
                n,
                point: s(n as f64),
                step_norm: 0.0,
                a_priori: None,
                a_posteriori: None,
                residual: 0.0,
                step_norm_d: None,
            });
        }
        assert_eq!(t.total(), 1000);
        assert!(t.is_truncated());
        let ns: Vec<usize> = t.records().map(|r| r.n).collect();
        assert_eq!(ns.len(), 2 * TRACE_KEEP);
        assert_eq!(ns[..TRACE_KEEP], (1..=100).collect::<Vec<_>>()[..]);
        assert_eq!(ns[TRACE_KEEP..], (901..=1000).collect::<Vec<_>>()[..]);
        assert_eq!(t.last().unwrap().n, 1000);
    }
}
