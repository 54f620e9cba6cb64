//! Finite-dimensional real vectors and the norms placed on them.
//!
//! Every norm here is a (possibly coordinate-weighted) `p`-norm with
//! `p ∈ {1, 2, ∞}`. A weight vector `w` turns `‖v‖` into `‖(w₁v₁, …, wₙvₙ)‖_p`,
//! so a single weight of `2` on a 1-D space doubles the plain norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack used on every norm inequality.
pub const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector must have at least one coordinate")]
    Empty,
    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("weight {index} must be finite and strictly positive, found {value}")]
    BadWeight { index: usize, value: f64 },
}

/// A point of `ℝⁿ`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self, SpaceError> {
        if coords.is_empty() {
            return Err(SpaceError::Empty);
        }
        let v = RealVector(coords);
        v.check_finite()?;
        Ok(v)
    }

    pub fn zeros(dim: usize) -> Self {
        RealVector(vec![0.0; dim.max(1)])
    }

    pub fn scalar(value: f64) -> Result<Self, SpaceError> {
        Self::new(vec![value])
    }

    /// Wraps raw coordinates produced by arithmetic. Finiteness is checked
    /// by the consumer (`norm`, operator evaluation).
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        RealVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn check_finite(&self) -> Result<(), SpaceError> {
        match self.0.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(SpaceError::NonFinite {
                index,
                value: self.0[index],
            }),
            None => Ok(()),
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<(), SpaceError> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(SpaceError::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    /// `self − other`.
    pub fn sub(&self, other: &RealVector) -> Result<RealVector, SpaceError> {
        combine(1.0, self, -1.0, other)
    }
}

impl std::ops::Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `a·x + b·y` with a single rounding of the exact two-term sum (up to the
/// compensated-sum error, which stays within one ulp).
pub(crate) fn fused_axpby(a: f64, x: f64, b: f64, y: f64) -> f64 {
    let p = a * x;
    let ep = a.mul_add(x, -p);
    let q = b * y;
    let eq = b.mul_add(y, -q);
    // TwoSum(p, q)
    let s = p + q;
    let bb = s - p;
    let es = (p - (s - bb)) + (q - bb);
    s + (es + ep + eq)
}

/// Returns `αx + βy` coordinatewise.
pub fn combine(
    alpha: f64,
    x: &RealVector,
    beta: f64,
    y: &RealVector,
) -> Result<RealVector, SpaceError> {
    y.check_dim(x.dim())?;
    Ok(RealVector(
        x.0.iter()
            .zip(&y.0)
            .map(|(&xi, &yi)| fused_axpby(alpha, xi, beta, yi))
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        })
    }
}

/// A norm on `ℝⁿ`: a `p`-norm, optionally weighted per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSpec {
    kind: NormKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl NormSpec {
    pub fn new(kind: NormKind) -> Self {
        NormSpec {
            kind,
            weights: None,
        }
    }

    pub fn l1() -> Self {
        Self::new(NormKind::L1)
    }

    pub fn l2() -> Self {
        Self::new(NormKind::L2)
    }

    pub fn linf() -> Self {
        Self::new(NormKind::Linf)
    }

    /// A weighted norm. All weights must be finite and strictly positive.
    pub fn weighted(kind: NormKind, weights: Vec<f64>) -> Result<Self, SpaceError> {
        if weights.is_empty() {
            return Err(SpaceError::Empty);
        }
        if let Some(index) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(SpaceError::BadWeight {
                index,
                value: weights[index],
            });
        }
        Ok(NormSpec {
            kind,
            weights: Some(weights),
        })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of coordinate `i` (1 when unweighted).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn check_dim(&self, dim: usize) -> Result<(), SpaceError> {
        match &self.weights {
            Some(w) if w.len() != dim => Err(SpaceError::DimensionMismatch {
                expected: w.len(),
                found: dim,
            }),
            _ => Ok(()),
        }
    }

    /// `‖v‖`.
    pub fn norm(&self, v: &RealVector) -> Result<f64, SpaceError> {
        self.check_dim(v.dim())?;
        v.check_finite()?;
        let scaled = v.0.iter().enumerate().map(|(i, x)| (self.weight(i) * x).abs());
        Ok(match self.kind {
            NormKind::L1 => scaled.sum(),
            NormKind::L2 => {
                // Scale by the largest entry so squares neither overflow nor underflow.
                let big = scaled.clone().fold(0.0_f64, f64::max);
                if big == 0.0 {
                    0.0
                } else {
                    big * scaled.map(|s| (s / big) * (s / big)).sum::<f64>().sqrt()
                }
            }
            NormKind::Linf => scaled.fold(0.0_f64, f64::max),
        })
    }

    /// `‖x − y‖`.
    pub fn distance(&self, x: &RealVector, y: &RealVector) -> Result<f64, SpaceError> {
        self.norm(&x.sub(y)?)
    }
}

/// Free-function form of [`NormSpec::norm`].
pub fn norm(v: &RealVector, spec: &NormSpec) -> Result<f64, SpaceError> {
    spec.norm(v)
}

/// Two norms on the same space; `d` must be dominated by `rho`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormPair {
    pub d: NormSpec,
    pub rho: NormSpec,
}

impl NormPair {
    pub fn new(d: NormSpec, rho: NormSpec) -> Self {
        NormPair { d, rho }
    }
}

/// Outcome of sampling `‖v‖_d ≤ ‖v‖_ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub pair: NormPair,
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
    /// Largest observed `‖v‖_d / ‖v‖_ρ`.
    pub worst_ratio: f64,
    /// Vector attaining `worst_ratio`.
    pub witness: RealVector,
}

/// Samples `sample_count` seeded vectors and checks `‖v‖_d ≤ ‖v‖_ρ·(1 + 1e−12)`.
///
/// The unit vectors and the all-ones vector are probed before the random
/// draws, so the extremal directions of the unweighted `p`-norms are always
/// tried. Random coordinates are uniform on `[−1, 1]`.
pub fn validate_dominance(
    pair: &NormPair,
    dim: usize,
    sample_count: usize,
    seed: u64,
) -> Result<DominanceVerdict, SpaceError> {
    pair.d.check_dim(dim)?;
    pair.rho.check_dim(dim)?;
    let dim = dim.max(1);
    let mut probes: Vec<RealVector> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            RealVector(e)
        })
        .collect();
    probes.push(RealVector(vec![1.0; dim]));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = (0..sample_count.max(1))
        .map(|_| RealVector((0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()));

    let mut worst_ratio = f64::NEG_INFINITY;
    let mut witness = probes[0].clone();
    let mut passed = true;
    for v in probes.into_iter().chain(random) {
        let nd = pair.d.norm(&v)?;
        let nr = pair.rho.norm(&v)?;
        if nd == 0.0 && nr == 0.0 {
            continue;
        }
        if nd > nr * (1.0 + NORM_SLACK) {
            passed = false;
        }
        let ratio = if nr == 0.0 { f64::INFINITY } else { nd / nr };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            witness = v;
        }
    }
    Ok(DominanceVerdict {
        pair: pair.clone(),
        passed,
        samples: sample_count.max(1),
        seed,
        worst_ratio,
        witness,
    })
}
