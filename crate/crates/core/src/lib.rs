//! Fixed points of enriched contractions on `ℝⁿ`.
//!
//! A map `T` is a `(b, θ)`-enriched contraction if
//! `‖b(x − y) + Tx − Ty‖ ≤ θ‖x − y‖` with `b ≥ 0` and `θ < b + 1`. Every such
//! map has exactly one fixed point, and the averaged iteration
//! `x_{n+1} = (1 − λ)x_n + λT(x_n)` with `λ = 1/(b + 1)` converges to it
//! geometrically with factor `c = θ/(b + 1)`. Contractions are the case
//! `b = 0`; the reflection `x ↦ 1 − x` is not a contraction but is enriched
//! for every `b ∈ (0, 1)`.
//!
//! ```
//! use enfix::{solve, EnrichmentCertificate, NormSpec, Operator, RealVector, SolveConfig};
//!
//! let cert = EnrichmentCertificate::declared(0.5, 0.5)?;
//! let cfg = SolveConfig::new(RealVector::scalar(0.0)?, 1e-10);
//! let report = solve(&Operator::reflection(), &cert, &NormSpec::l2(), &cfg)?;
//! assert!((report.fixed_point[0] - 0.5).abs() <= 1e-10);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod enrichment;
pub mod operators;
pub mod solver;
pub mod spaces;

pub use enrichment::{
    affine_certificate, affine_certificate_or_estimate, averaged, check_certificate, estimate,
    BGrid, CertificateCheck, EnrichmentCertificate, EnrichmentError, Estimate, GridPoint,
    Provenance, SamplePlan, Verdict,
};
pub use operators::{residual, FixedPointReference, Matrix, Operator, OperatorError};
pub use solver::{
    bound_a_posteriori, bound_a_priori, bound_unified, solve, solve_asymptotic, solve_local,
    solve_maia, IterationRecord, IterationTrace, SolveConfig, SolveError, SolveMode, SolveReport,
    Termination,
};
pub use spaces::{
    combine, norm, validate_dominance, DominanceVerdict, NormKind, NormPair, NormSpec,
    RealVector, SpaceError,
};
