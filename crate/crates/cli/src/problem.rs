//! Problem files: a strict TOML schema and its validation into solver inputs.
//!
//! Unknown keys are rejected everywhere. Parse errors carry the line and
//! column from the TOML parser; validation errors name the offending field
//! as `section.key`.

use std::path::Path;

use enfix::{
    BGrid, EnrichmentCertificate, FixedPointReference, Matrix, NormKind, NormPair, NormSpec,
    Operator, RealVector, SamplePlan,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Seed used whenever neither the file nor the command line gives one.
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PAIRS: usize = 1000;
pub const DEFAULT_DOMINANCE_SAMPLES: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub space: SpaceSection,
    pub operator: OperatorSection,
    #[serde(default)]
    pub certificate: CertificateSection,
    pub solve: SolveSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub dimension: usize,
    pub norm: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    pub norm: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSection {
    Affine {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
    Reflection {},
    Threshold {
        cut: f64,
        low: f64,
        high: f64,
    },
    Power {
        exponent: u32,
        base: Box<OperatorSection>,
    },
    Composed {
        outer: Box<OperatorSection>,
        inner: Box<OperatorSection>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    #[default]
    Declared,
    Estimate,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    #[serde(default)]
    pub method: CertificateMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// One `[low, high]` per coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    #[default]
    Global,
    Local,
    Asymptotic,
    Maia,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    #[serde(default)]
    pub mode: ModeKind,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_norm: Option<NormSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    Converged,
    NotConverged,
    PreconditionFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    #[serde(default)]
    pub expect: Expectation,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
    pub b_max: Option<f64>,
    pub b_step: Option<f64>,
    pub lambda_override: Option<f64>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string().trim_end().to_owned()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        let c = &mut self.certificate;
        if o.seed.is_some() {
            c.seed = o.seed;
        }
        if o.pairs.is_some() {
            c.pairs = o.pairs;
        }
        if o.b_max.is_some() {
            c.b_max = o.b_max;
        }
        if o.b_step.is_some() {
            c.b_step = o.b_step;
        }
        let s = &mut self.solve;
        if o.tol.is_some() {
            s.tol = o.tol;
        }
        if o.max_iter.is_some() {
            s.max_iter = o.max_iter;
        }
        if o.lambda_override.is_some() {
            s.lambda_override = o.lambda_override;
        }
    }
}

/// How the solver obtains its certificate.
#[derive(Debug, Clone, PartialEq)]
pub enum CertificateSource {
    Declared(EnrichmentCertificate),
    Estimate,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Global,
    Local { radius: f64 },
    Asymptotic { exponent: u32 },
    Maia { d: NormSpec, samples: usize },
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub dim: usize,
    pub norm: NormSpec,
    pub operator: Operator,
    /// `U^N` in asymptotic mode, the operator itself otherwise.
    pub certified_operator: Operator,
    pub certificate: CertificateSource,
    pub plan: SamplePlan,
    pub b_grid: BGrid,
    pub seed: u64,
    pub mode: Mode,
    pub x0: RealVector,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub lambda_override: Option<f64>,
    pub reference: Option<FixedPointReference>,
    pub expect: Expectation,
}

fn field<T>(name: &str, r: Result<T, impl std::fmt::Display>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Invalid(format!("{name}: {e}")))
}

fn vector(name: &str, coords: &[f64], dim: usize) -> Result<RealVector, CliError> {
    let v = field(name, RealVector::new(coords.to_vec()))?;
    field(name, v.check_dim(dim))?;
    Ok(v)
}

fn norm_spec(name: &str, kind: NormKind, weights: Option<&Vec<f64>>, dim: usize) -> Result<NormSpec, CliError> {
    match weights {
        None => Ok(NormSpec::new(kind)),
        Some(w) => {
            let spec = field(name, NormSpec::weighted(kind, w.clone()))?;
            field(name, spec.check_dim(dim))?;
            Ok(spec)
        }
    }
}

fn build_operator(path: &str, sec: &OperatorSection) -> Result<Operator, CliError> {
    match sec {
        OperatorSection::Affine { matrix, offset } => {
            let m = field(&format!("{path}.matrix"), Matrix::from_rows(matrix.clone()))?;
            let u = match offset {
                Some(u) => vector(&format!("{path}.offset"), u, m.dim())?,
                None => RealVector::zeros(m.dim()),
            };
            field(path, Operator::affine(m, u))
        }
        OperatorSection::Reflection {} => Ok(Operator::reflection()),
        OperatorSection::Threshold { cut, low, high } => {
            field(path, Operator::threshold(*cut, *low, *high))
        }
        OperatorSection::Power { exponent, base } => {
            let base = build_operator(&format!("{path}.base"), base)?;
            field(&format!("{path}.exponent"), base.power(*exponent))
        }
        OperatorSection::Composed { outer, inner } => {
            let outer = build_operator(&format!("{path}.outer"), outer)?;
            let inner = build_operator(&format!("{path}.inner"), inner)?;
            field(path, Operator::composed(outer, inner))
        }
    }
}

impl Problem {
    pub fn from_file(file: ProblemFile) -> Result<Self, CliError> {
        let dim = file.space.dimension;
        if dim == 0 {
            return Err(CliError::Invalid("space.dimension: must be at least 1".into()));
        }
        let norm = norm_spec("space.weights", file.space.norm, file.space.weights.as_ref(), dim)?;
        let operator = build_operator("operator", &file.operator)?;
        if operator.dim() != dim {
            return Err(CliError::Invalid(format!(
                "operator: acts on dimension {}, space.dimension is {dim}",
                operator.dim()
            )));
        }

        let s = &file.solve;
        let mode = match s.mode {
            ModeKind::Global => Mode::Global,
            ModeKind::Local => Mode::Local {
                radius: s
                    .radius
                    .ok_or_else(|| CliError::Invalid("solve.radius: required in local mode".into()))?,
            },
            ModeKind::Asymptotic => Mode::Asymptotic {
                exponent: s.exponent.ok_or_else(|| {
                    CliError::Invalid("solve.exponent: required in asymptotic mode".into())
                })?,
            },
            ModeKind::Maia => {
                let d = s
                    .d_norm
                    .as_ref()
                    .ok_or_else(|| CliError::Invalid("solve.d_norm: required in maia mode".into()))?;
                Mode::Maia {
                    d: norm_spec("solve.d_norm.weights", d.norm, d.weights.as_ref(), dim)?,
                    samples: s.dominance_samples.unwrap_or(DEFAULT_DOMINANCE_SAMPLES),
                }
            }
        };
        if !matches!(mode, Mode::Local { .. }) && s.radius.is_some() {
            return Err(CliError::Invalid("solve.radius: only valid in local mode".into()));
        }
        if !matches!(mode, Mode::Asymptotic { .. }) && s.exponent.is_some() {
            return Err(CliError::Invalid("solve.exponent: only valid in asymptotic mode".into()));
        }
        if !matches!(mode, Mode::Maia { .. }) && (s.d_norm.is_some() || s.dominance_samples.is_some()) {
            return Err(CliError::Invalid("solve.d_norm: only valid in maia mode".into()));
        }
        if let Mode::Local { radius } = mode {
            if !(radius.is_finite() && radius > 0.0) {
                return Err(CliError::Invalid(format!("solve.radius: must be positive, got {radius}")));
            }
        }
        let certified_operator = match mode {
            Mode::Asymptotic { exponent } => field("solve.exponent", operator.power(exponent))?,
            _ => operator.clone(),
        };

        let x0 = vector("solve.x0", &s.x0, dim)?;
        let tol = s.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Invalid(format!("solve.tol: must be positive, got {tol}")));
        }
        if s.max_iter == Some(0) {
            return Err(CliError::Invalid("solve.max_iter: must be at least 1".into()));
        }
        if let Some(l) = s.lambda_override {
            if !(l > 0.0 && l <= 1.0) {
                return Err(CliError::Invalid(format!("solve.lambda_override: must lie in (0, 1], got {l}")));
            }
        }

        let c = &file.certificate;
        let certificate = match c.method {
            CertificateMethod::Declared => {
                let (b, theta) = match (c.b, c.theta) {
                    (Some(b), Some(t)) => (b, t),
                    _ => {
                        return Err(CliError::Invalid(
                            "certificate: declared method needs both `b` and `theta`".into(),
                        ))
                    }
                };
                CertificateSource::Declared(field("certificate", EnrichmentCertificate::declared(b, theta))?)
            }
            method => {
                if c.b.is_some() || c.theta.is_some() {
                    return Err(CliError::Invalid(
                        "certificate: `b`/`theta` are only valid with method = \"declared\"".into(),
                    ));
                }
                if method == CertificateMethod::Estimate {
                    CertificateSource::Estimate
                } else {
                    CertificateSource::Analytic
                }
            }
        };
        let seed = c.seed.unwrap_or(DEFAULT_SEED);
        let domain = match &c.domain {
            Some(d) => {
                if d.len() != dim {
                    return Err(CliError::Invalid(format!(
                        "certificate.domain: {} intervals for dimension {dim}",
                        d.len()
                    )));
                }
                d.iter().map(|[lo, hi]| (*lo, *hi)).collect()
            }
            None => vec![(-1.0, 1.0); dim],
        };
        let plan = field(
            "certificate",
            SamplePlan::new(c.pairs.unwrap_or(DEFAULT_PAIRS), seed, domain),
        )?;
        let b_grid = field(
            "certificate.b_step",
            BGrid::uniform(c.b_max.unwrap_or(10.0), c.b_step.unwrap_or(0.05)),
        )?;

        let reference = match &file.reference {
            Some(r) => {
                let tolerance = r.residual_tolerance.unwrap_or(1e-12);
                if tolerance.is_nan() || tolerance < 0.0 {
                    return Err(CliError::Invalid("reference.residual_tolerance: must be non-negative".into()));
                }
                Some(FixedPointReference::new(
                    vector("reference.point", &r.point, dim)?,
                    tolerance,
                ))
            }
            None => None,
        };
        let expect = file.bench.as_ref().map(|b| b.expect).unwrap_or_default();

        Ok(Problem {
            dim,
            norm,
            operator,
            certified_operator,
            certificate,
            plan,
            b_grid,
            seed,
            mode,
            x0,
            tol,
            max_iter: s.max_iter,
            lambda_override: s.lambda_override,
            reference,
            expect,
            file,
        })
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let mut file = ProblemFile::load(path)?;
        file.apply(overrides);
        Self::from_file(file)
    }

    /// `(d, ρ)` in maia mode; `ρ` is the space norm.
    pub fn norm_pair(&self) -> Option<NormPair> {
        match &self.mode {
            Mode::Maia { d, .. } => Some(NormPair::new(d.clone(), self.norm.clone())),
            _ => None,
        }
    }
}
