//! Enrichment certificates `(b, θ)` and how to obtain them.
//!
//! A map `T` is a `(b, θ)`-enriched contraction when
//!
//! ```text
//! ‖b(x − y) + Tx − Ty‖ ≤ θ‖x − y‖   for all x, y,   b ≥ 0,  0 ≤ θ < b + 1.
//! ```
//!
//! Dividing by `b + 1` shows that the averaged map `T_λ = (1 − λ)I + λT` with
//! `λ = 1/(b + 1)` is a contraction with factor `c = λθ < 1`. Certificates are
//! either declared by the caller, computed from the induced matrix norm of
//! `bI + A` for affine maps, or estimated by sampling pairs. Sampling can only
//! refute the inequality, never prove it, so estimated certificates carry the
//! plan they were drawn from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::operators::{Matrix, Operator, OperatorError};
use crate::spaces::{self, NormKind, NormSpec, RealVector, SpaceError, NORM_SLACK};

/// Multiplicative inflation applied to every estimated `θ`.
pub const THETA_INFLATION: f64 = 1e-9;
/// Convergence tolerance of the L2 power iteration (relative change).
pub const POWER_ITERATION_TOL: f64 = 1e-12;
pub const POWER_ITERATION_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnrichmentError {
    #[error("inadmissible certificate: need b ≥ 0 and 0 ≤ θ < b + 1, got b = {b}, θ = {theta}")]
    Inadmissible { b: f64, theta: f64 },
    #[error("b grid must be non-empty, finite, non-negative and strictly ascending")]
    BadGrid,
    #[error("grid step must be positive and no larger than the range, got max {max}, step {step}")]
    BadGridStep { max: f64, step: f64 },
    #[error("degenerate sampling box on coordinate {coord}: [{low}, {high}]")]
    DegenerateDomain { coord: usize, low: f64, high: f64 },
    #[error("sample plan needs at least one pair")]
    NoPairs,
    #[error("every sampled pair had x = y")]
    AllPairsDegenerate,
    #[error("sample box has {found} coordinates, operator acts on {expected}")]
    DomainDimension { expected: usize, found: usize },
    #[error("power iteration for ‖bI + A‖₂ did not converge at b = {b} within {steps} steps")]
    PowerIterationStalled { b: f64, steps: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Where a certificate came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Declared,
    Empirical {
        sample_count: usize,
        seed: u64,
        b_grid: BGrid,
    },
    Analytic,
}

/// The constants `(b, θ)` together with the derived `λ = 1/(b+1)` and `c = λθ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentCertificate {
    b: f64,
    theta: f64,
    lambda: f64,
    c: f64,
    provenance: Provenance,
}

impl EnrichmentCertificate {
    /// A caller-asserted certificate.
    pub fn declared(b: f64, theta: f64) -> Result<Self, EnrichmentError> {
        Self::with_provenance(b, theta, Provenance::Declared)
    }

    pub fn with_provenance(
        b: f64,
        theta: f64,
        provenance: Provenance,
    ) -> Result<Self, EnrichmentError> {
        let bad = EnrichmentError::Inadmissible { b, theta };
        if !(b.is_finite() && theta.is_finite() && b >= 0.0 && theta >= 0.0 && theta < b + 1.0) {
            return Err(bad);
        }
        let lambda = 1.0 / (b + 1.0);
        let c = theta * lambda;
        if c >= 1.0 {
            return Err(bad);
        }
        Ok(EnrichmentCertificate {
            b,
            theta,
            lambda,
            c,
            provenance,
        })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Averaging weight `1/(b + 1)`; equals 1 exactly when `b = 0`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Contraction factor of the averaged map, `θ/(b + 1)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self.provenance, Provenance::Empirical { .. })
    }
}

/// Ascending candidate values for `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BGrid(Vec<f64>);

impl BGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, EnrichmentError> {
        let ok = !values.is_empty()
            && values.iter().all(|b| b.is_finite() && *b >= 0.0)
            && values.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(BGrid(values))
        } else {
            Err(EnrichmentError::BadGrid)
        }
    }

    /// `0, step, 2·step, …` up to and including `max` (within rounding).
    pub fn uniform(max: f64, step: f64) -> Result<Self, EnrichmentError> {
        if !(step.is_finite() && step > 0.0 && max.is_finite() && max >= 0.0) {
            return Err(EnrichmentError::BadGridStep { max, step });
        }
        let count = (max / step + 1e-9).floor() as usize;
        Self::new((0..=count).map(|i| i as f64 * step).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for BGrid {
    /// `0, 0.05, …, 10`.
    fn default() -> Self {
        BGrid::uniform(10.0, 0.05).expect("static grid")
    }
}

/// Seeded pairs `(x, y)` drawn uniformly from a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePlan {
    pair_count: usize,
    seed: u64,
    domain: Vec<(f64, f64)>,
}

impl SamplePlan {
    pub fn new(
        pair_count: usize,
        seed: u64,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self, EnrichmentError> {
        if pair_count == 0 {
            return Err(EnrichmentError::NoPairs);
        }
        if domain.is_empty() {
            return Err(SpaceError::Empty.into());
        }
        for (coord, &(low, high)) in domain.iter().enumerate() {
            if !(low.is_finite() && high.is_finite() && low < high) {
                return Err(EnrichmentError::DegenerateDomain { coord, low, high });
            }
        }
        Ok(SamplePlan {
            pair_count,
            seed,
            domain,
        })
    }

    /// The cube `[low, high]ⁿ`.
    pub fn cube(
        pair_count: usize,
        seed: u64,
        dim: usize,
        low: f64,
        high: f64,
    ) -> Result<Self, EnrichmentError> {
        Self::new(pair_count, seed, vec![(low, high); dim])
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    /// The pairs this plan stands for; the same plan always yields the same pairs.
    pub fn draw_pairs(&self) -> Vec<(RealVector, RealVector)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let point = |rng: &mut ChaCha8Rng| {
            RealVector::new(
                self.domain
                    .iter()
                    .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                    .collect(),
            )
            .expect("finite box")
        };
        (0..self.pair_count)
            .map(|_| {
                let x = point(&mut rng);
                let y = point(&mut rng);
                (x, y)
            })
            .collect()
    }
}

/// `x ↦ (1 − λ)x + λT(x)`.
pub fn averaged(op: &Operator, lambda: f64) -> Result<Operator, OperatorError> {
    op.averaged(lambda)
}

/// Differences `x − y` and `Tx − Ty` for every non-degenerate sampled pair.
struct PairDiffs {
    pairs: Vec<(RealVector, RealVector)>,
    dx: Vec<RealVector>,
    dt: Vec<RealVector>,
    dx_norm: Vec<f64>,
}

impl PairDiffs {
    fn collect(op: &Operator, spec: &NormSpec, plan: &SamplePlan) -> Result<Self, EnrichmentError> {
        if plan.dim() != op.dim() {
            return Err(EnrichmentError::DomainDimension {
                expected: op.dim(),
                found: plan.dim(),
            });
        }
        let mut out = PairDiffs {
            pairs: Vec::new(),
            dx: Vec::new(),
            dt: Vec::new(),
            dx_norm: Vec::new(),
        };
        for (x, y) in plan.draw_pairs() {
            let dx = x.sub(&y)?;
            let n = spec.norm(&dx)?;
            // x = y makes the inequality vacuous.
            if n == 0.0 {
                continue;
            }
            let dt = op.evaluate(&x)?.sub(&op.evaluate(&y)?)?;
            out.pairs.push((x, y));
            out.dx.push(dx);
            out.dt.push(dt);
            out.dx_norm.push(n);
        }
        if out.pairs.is_empty() {
            return Err(EnrichmentError::AllPairsDegenerate);
        }
        Ok(out)
    }

    /// `‖b·dx + dt‖` for pair `i`.
    fn lhs(&self, i: usize, b: f64, spec: &NormSpec) -> Result<f64, EnrichmentError> {
        Ok(spec.norm(&spaces::combine(b, &self.dx[i], 1.0, &self.dt[i])?)?)
    }

    /// Largest `‖b·dx + dt‖ / ‖dx‖` and the index attaining it.
    fn max_ratio(&self, b: f64, spec: &NormSpec) -> Result<(f64, usize), EnrichmentError> {
        let mut best = (f64::NEG_INFINITY, 0);
        for i in 0..self.dx.len() {
            let r = self.lhs(i, b, spec)? / self.dx_norm[i];
            if r > best.0 {
                best = (r, i);
            }
        }
        Ok(best)
    }
}

/// Result of testing a certificate against sampled pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub passed: bool,
    /// Largest `‖b(x − y) + Tx − Ty‖ / ‖x − y‖` seen.
    pub max_ratio: f64,
    pub theta: f64,
    /// Pair attaining `max_ratio`.
    pub witness: (RealVector, RealVector),
    pub pairs_used: usize,
}

/// Samples the plan's pairs and checks `‖b(x−y) + Tx − Ty‖ ≤ θ‖x−y‖·(1 + 1e−12)` on each.
pub fn check_certificate(
    op: &Operator,
    cert: &EnrichmentCertificate,
    spec: &NormSpec,
    plan: &SamplePlan,
) -> Result<CertificateCheck, EnrichmentError> {
    let diffs = PairDiffs::collect(op, spec, plan)?;
    let mut passed = true;
    for i in 0..diffs.dx.len() {
        if diffs.lhs(i, cert.b, spec)? > cert.theta * diffs.dx_norm[i] * (1.0 + NORM_SLACK) {
            passed = false;
        }
    }
    let (max_ratio, at) = diffs.max_ratio(cert.b, spec)?;
    Ok(CertificateCheck {
        passed,
        max_ratio,
        theta: cert.theta,
        witness: diffs.pairs[at].clone(),
        pairs_used: diffs.dx.len(),
    })
}

/// One grid evaluation: `θ̂(b)` and `c(b) = θ̂(b)/(b + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub b: f64,
    pub theta_hat: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Certified { certificate: EnrichmentCertificate },
    /// Every grid point has `c(b) ≥ 1`.
    NotCertifiable { best: GridPoint },
}

/// A certificate search over a `b` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub grid: Vec<GridPoint>,
    pub verdict: Verdict,
}

impl Estimate {
    pub fn certificate(&self) -> Option<&EnrichmentCertificate> {
        match &self.verdict {
            Verdict::Certified { certificate } => Some(certificate),
            Verdict::NotCertifiable { .. } => None,
        }
    }

    pub fn into_certificate(self) -> Option<EnrichmentCertificate> {
        match self.verdict {
            Verdict::Certified { certificate } => Some(certificate),
            Verdict::NotCertifiable { .. } => None,
        }
    }
}

/// Picks the grid point with the smallest `c(b)` (smallest `b` on ties) and
/// inflates its `θ̂` by `1 + THETA_INFLATION`.
fn select(grid: Vec<GridPoint>, provenance: Provenance) -> Estimate {
    let mut best = grid[0];
    for p in &grid[1..] {
        if p.c < best.c {
            best = *p;
        }
    }
    let verdict = if best.c < 1.0 {
        EnrichmentCertificate::with_provenance(
            best.b,
            best.theta_hat * (1.0 + THETA_INFLATION),
            provenance,
        )
        .map(|certificate| Verdict::Certified { certificate })
        .unwrap_or(Verdict::NotCertifiable { best })
    } else {
        Verdict::NotCertifiable { best }
    };
    Estimate { grid, verdict }
}

/// Empirical certificate: for each grid `b`, `θ̂(b)` is the largest sampled
/// ratio `‖b(x−y) + Tx − Ty‖ / ‖x−y‖`.
pub fn estimate(
    op: &Operator,
    spec: &NormSpec,
    plan: &SamplePlan,
    b_grid: &BGrid,
) -> Result<Estimate, EnrichmentError> {
    let diffs = PairDiffs::collect(op, spec, plan)?;
    let grid = b_grid
        .values()
        .iter()
        .map(|&b| {
            let (theta_hat, _) = diffs.max_ratio(b, spec)?;
            Ok(GridPoint {
                b,
                theta_hat,
                c: theta_hat / (b + 1.0),
            })
        })
        .collect::<Result<Vec<_>, EnrichmentError>>()?;
    Ok(select(
        grid,
        Provenance::Empirical {
            sample_count: diffs.dx.len(),
            seed: plan.seed(),
            b_grid: b_grid.clone(),
        },
    ))
}

/// Operator norm of `m` induced by `spec`.
///
/// Weighted norms are handled through `‖M‖_W = ‖W M W⁻¹‖_p`. L1 and L∞ use
/// the column- and row-sum formulas; L2 runs power iteration on `MᵀM`.
pub fn induced_norm(m: &Matrix, spec: &NormSpec) -> Result<f64, EnrichmentError> {
    spec.check_dim(m.dim())?;
    let m = match spec.weights() {
        Some(w) => m.conjugated_by_diag(w),
        None => m.clone(),
    };
    let n = m.dim();
    Ok(match spec.kind() {
        NormKind::L1 => (0..n)
            .map(|j| (0..n).map(|i| m.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Linf => m
            .rows()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::L2 => spectral_norm(&m).ok_or(EnrichmentError::PowerIterationStalled {
            b: f64::NAN,
            steps: POWER_ITERATION_MAX_STEPS,
        })?,
    })
}

/// Largest singular value via power iteration on `MᵀM`. `None` on stall.
fn spectral_norm(m: &Matrix) -> Option<f64> {
    let n = m.dim();
    if m.rows().flatten().all(|x| *x == 0.0) {
        return Some(0.0);
    }
    // Non-uniform start so it is unlikely to be orthogonal to the top singular vector.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut prev = 0.0_f64;
    for _ in 0..POWER_ITERATION_MAX_STEPS {
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len == 0.0 {
            // Start vector fell into the kernel; perturb along a basis vector.
            v = vec![0.0; n];
            v[0] = 1.0;
            continue;
        }
        v.iter_mut().for_each(|x| *x /= len);
        let mv = m.mul_vec(&v);
        let rayleigh = mv.iter().map(|x| x * x).sum::<f64>();
        if (rayleigh - prev).abs() <= POWER_ITERATION_TOL * rayleigh {
            return Some(rayleigh.sqrt());
        }
        prev = rayleigh;
        v = m.transpose_mul_vec(&mv);
    }
    None
}

/// Analytic certificate for `Tx = Ax + u`: `θ(b)` is the induced norm of `bI + A`.
pub fn affine_certificate(
    a: &Matrix,
    spec: &NormSpec,
    b_grid: &BGrid,
) -> Result<Estimate, EnrichmentError> {
    let grid = b_grid
        .values()
        .iter()
        .map(|&b| {
            let theta_hat = induced_norm(&a.shifted(b), spec).map_err(|e| match e {
                EnrichmentError::PowerIterationStalled { steps, .. } => {
                    EnrichmentError::PowerIterationStalled { b, steps }
                }
                other => other,
            })?;
            Ok(GridPoint {
                b,
                theta_hat,
                c: theta_hat / (b + 1.0),
            })
        })
        .collect::<Result<Vec<_>, EnrichmentError>>()?;
    Ok(select(grid, Provenance::Analytic))
}

/// Analytic certificate when `op` is affine and the norm computation
/// succeeds; otherwise the empirical estimate on `plan`.
pub fn affine_certificate_or_estimate(
    op: &Operator,
    spec: &NormSpec,
    b_grid: &BGrid,
    plan: &SamplePlan,
) -> Result<Estimate, EnrichmentError> {
    match op.as_affine() {
        Some((a, _)) => match affine_certificate(a, spec, b_grid) {
            Err(EnrichmentError::PowerIterationStalled { .. }) => estimate(op, spec, plan, b_grid),
            other => other,
        },
        None => estimate(op, spec, plan, b_grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(x: f64) -> RealVector {
        RealVector::scalar(x).unwrap()
    }

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn certificate_derived_constants() {
        let c = EnrichmentCertificate::declared(0.5, 0.5).unwrap();
        assert_eq!(c.lambda(), 1.0 / 1.5);
        assert_abs_diff_eq!(c.c(), 1.0 / 3.0, epsilon = 1e-16);
        let picard = EnrichmentCertificate::declared(0.0, 0.7).unwrap();
        assert_eq!(picard.lambda(), 1.0);
        assert_eq!(picard.c(), 0.7);
        assert!(EnrichmentCertificate::declared(0.0, 0.0).is_ok());
    }

    #[test]
    fn inadmissible_certificates() {
        for (b, t) in [(0.0, 1.0), (1.0, 2.0), (-0.1, 0.0), (0.5, -0.1), (f64::NAN, 0.0)] {
            assert!(
                EnrichmentCertificate::declared(b, t).is_err(),
                "({b}, {t}) accepted"
            );
        }
    }

    #[test]
    fn averaged_examples() {
        let r = Operator::reflection();
        let half = averaged(&r, 0.5).unwrap();
        for x in [0.0, 0.2, 0.9, 1.0] {
            assert_abs_diff_eq!(half.evaluate(&s(x)).unwrap()[0], 0.5, epsilon = 1e-16);
        }
        let one = averaged(&r, 1.0).unwrap();
        assert_eq!(one.evaluate(&s(0.3)).unwrap(), r.evaluate(&s(0.3)).unwrap());
        assert_eq!(
            averaged(&r, 2.0 / 3.0).unwrap().evaluate(&s(0.0)).unwrap(),
            s(2.0 / 3.0)
        );
        assert!(averaged(&r, 0.0).is_err());
        assert!(averaged(&r, 1.5).is_err());
    }

    #[test]
    fn grid_construction() {
        let g = BGrid::default();
        assert_eq!(g.values().len(), 201);
        assert_eq!(g.values()[20], 1.0);
        assert_eq!(*g.values().last().unwrap(), 10.0);
        assert!(BGrid::new(vec![]).is_err());
        assert!(BGrid::new(vec![0.5, 0.5]).is_err());
        assert!(BGrid::new(vec![-1.0]).is_err());
        assert!(BGrid::uniform(1.0, 0.0).is_err());
    }

    #[test]
    fn plan_rejects_degenerate_box() {
        assert!(matches!(
            SamplePlan::new(10, 1, vec![(0.0, 1.0), (2.0, 2.0)]),
            Err(EnrichmentError::DegenerateDomain { coord: 1, .. })
        ));
        assert!(SamplePlan::new(0, 1, vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn check_examples() {
        let r = Operator::reflection();
        let plan = SamplePlan::cube(1000, 42, 1, 0.0, 1.0).unwrap();
        let l2 = NormSpec::l2();
        let ok = check_certificate(&r, &EnrichmentCertificate::declared(0.5, 0.5).unwrap(), &l2, &plan)
            .unwrap();
        assert!(ok.passed);
        let bad = check_certificate(&r, &EnrichmentCertificate::declared(0.0, 0.9).unwrap(), &l2, &plan)
            .unwrap();
        assert!(!bad.passed);
        assert_abs_diff_eq!(bad.max_ratio, 1.0, epsilon = 1e-6);
        let constant = Operator::affine(Matrix::zeros(1), s(3.0)).unwrap();
        let zero = EnrichmentCertificate::declared(0.0, 0.0).unwrap();
        assert!(check_certificate(&constant, &zero, &l2, &plan).unwrap().passed);
    }

    #[test]
    fn estimate_negation() {
        let neg = Operator::linear(mat(&[&[-1.0]]));
        let plan = SamplePlan::cube(500, 42, 1, -1.0, 1.0).unwrap();
        let grid = BGrid::new(vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let est = estimate(&neg, &NormSpec::l2(), &plan, &grid).unwrap();
        let cert = est.certificate().unwrap();
        assert_eq!(cert.b(), 1.0);
        assert!(cert.theta() < 1e-12);
        assert!(cert.is_empirical());
    }

    #[test]
    fn estimate_half_and_doubling() {
        let plan = SamplePlan::cube(500, 42, 1, -1.0, 1.0).unwrap();
        let half = Operator::linear(mat(&[&[0.5]]));
        let est = estimate(&half, &NormSpec::l2(), &plan, &BGrid::default()).unwrap();
        let cert = est.certificate().unwrap();
        assert_eq!(cert.b(), 0.0);
        assert_abs_diff_eq!(cert.theta(), 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(cert.c(), 0.5, epsilon = 1e-8);

        let double = Operator::linear(mat(&[&[2.0]]));
        let est = estimate(&double, &NormSpec::l2(), &plan, &BGrid::default()).unwrap();
        assert!(est.certificate().is_none());
    }

    #[test]
    fn estimate_rejects_wrong_box_dimension() {
        let plan = SamplePlan::cube(5, 1, 2, 0.0, 1.0).unwrap();
        assert!(matches!(
            estimate(&Operator::reflection(), &NormSpec::l2(), &plan, &BGrid::default()),
            Err(EnrichmentError::DomainDimension { .. })
        ));
    }

    #[test]
    fn affine_examples() {
        let grid = BGrid::uniform(1.0, 0.25).unwrap();
        let est = affine_certificate(&mat(&[&[-1.0]]), &NormSpec::l2(), &grid).unwrap();
        let cert = est.certificate().unwrap();
        assert_eq!((cert.b(), cert.theta(), cert.c()), (1.0, 0.0, 0.0));

        let est = affine_certificate(&Matrix::zeros(2), &NormSpec::l2(), &BGrid::default()).unwrap();
        let cert = est.certificate().unwrap();
        assert_eq!((cert.b(), cert.theta(), cert.c()), (0.0, 0.0, 0.0));

        let a = mat(&[&[0.0, 0.4], &[0.4, 0.0]]);
        let est = affine_certificate(&a, &NormSpec::l1(), &BGrid::default()).unwrap();
        assert_eq!(est.grid[0].theta_hat, 0.4);
        let cert = est.certificate().unwrap();
        assert_eq!(cert.b(), 0.0);
        assert_abs_diff_eq!(cert.c(), 0.4, epsilon = 1e-9);
        assert!(matches!(cert.provenance(), Provenance::Analytic));
    }

    #[test]
    fn induced_norms_match_hand_values() {
        let a = mat(&[&[1.0, -2.0], &[3.0, 4.0]]);
        assert_eq!(induced_norm(&a, &NormSpec::l1()).unwrap(), 6.0);
        assert_eq!(induced_norm(&a, &NormSpec::linf()).unwrap(), 7.0);
        // Singular values of [[1,-2],[3,4]]: sqrt(15 ± sqrt(125)).
        let expect = (15.0 + 125f64.sqrt()).sqrt();
        assert_abs_diff_eq!(induced_norm(&a, &NormSpec::l2()).unwrap(), expect, epsilon = 1e-9);
        // diag(2,1)·A·diag(1/2,1) = [[1,-4],[1.5,4]].
        let w = NormSpec::weighted(NormKind::Linf, vec![2.0, 1.0]).unwrap();
        assert_eq!(induced_norm(&a, &w).unwrap(), 5.5);
    }

    #[test]
    fn fallback_for_non_affine() {
        let plan = SamplePlan::cube(200, 3, 1, 0.0, 1.0).unwrap();
        let est = affine_certificate_or_estimate(
            &Operator::reflection(),
            &NormSpec::l2(),
            &BGrid::default(),
            &plan,
        )
        .unwrap();
        assert!(est.certificate().unwrap().is_empirical());
    }
}
