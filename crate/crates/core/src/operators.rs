//! Self-maps of `ℝⁿ` evaluated as black boxes.
//!
//! Operators are immutable trees. Leaves are affine maps and the two scalar
//! examples (the reflection `x ↦ 1 − x` on `[0, 1]` and a step function);
//! inner nodes are iterates, compositions and averaged maps.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::spaces::{self, NormSpec, RealVector, SpaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("matrix must be square and non-empty, row {row} has {len} entries for {rows} rows")]
    NotSquare { row: usize, len: usize, rows: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("composition of a {outer}-dimensional map after a {inner}-dimensional map")]
    ComposeMismatch { outer: usize, inner: usize },
    #[error("iterate exponent must be at least 1")]
    ZeroExponent,
    #[error("averaging weight must lie in (0, 1], got {0}")]
    BadLambda(f64),
    #[error("parameter `{0}` must be finite")]
    NonFiniteParameter(&'static str),
    #[error("operator produced a non-finite value at coordinate {index}")]
    NonFiniteOutput { index: usize },
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, OperatorError> {
        let n = rows.len();
        if n == 0 {
            return Err(OperatorError::NotSquare {
                row: 0,
                len: 0,
                rows: 0,
            });
        }
        let mut data = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(OperatorError::NotSquare {
                    row,
                    len: r.len(),
                    rows: n,
                });
            }
            if let Some(col) = r.iter().position(|x| !x.is_finite()) {
                return Err(OperatorError::NonFiniteEntry { row, col });
            }
            data.extend(r);
        }
        Ok(Matrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::identity(n);
        m.data.iter_mut().for_each(|x| *x *= s);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n)
    }

    /// `b·I + self`.
    pub fn shifted(&self, b: f64) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += b;
        }
        m
    }

    /// `W·self·W⁻¹` for the diagonal `W = diag(w)`.
    pub fn conjugated_by_diag(&self, w: &[f64]) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                m.data[i * self.n + j] *= w[i] / w[j];
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j) * x[i]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Affine { matrix: Matrix, offset: RealVector },
    Reflection,
    Threshold { cut: f64, low: f64, high: f64 },
    Power { base: Box<Operator>, exponent: u32 },
    Composed { outer: Box<Operator>, inner: Box<Operator> },
    Averaged { base: Box<Operator>, lambda: f64 },
}

/// A pure self-map `T : ℝⁿ → ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    form: Form,
}

impl Operator {
    /// `x ↦ Ax + u`.
    pub fn affine(matrix: Matrix, offset: RealVector) -> Result<Self, OperatorError> {
        offset.check_dim(matrix.dim())?;
        Ok(Operator {
            dim: matrix.dim(),
            form: Form::Affine { matrix, offset },
        })
    }

    /// `x ↦ Ax`.
    pub fn linear(matrix: Matrix) -> Self {
        let n = matrix.dim();
        Operator {
            dim: n,
            form: Form::Affine {
                matrix,
                offset: RealVector::zeros(n),
            },
        }
    }

    /// The 1-D map `x ↦ 1 − x`.
    pub fn reflection() -> Self {
        Operator {
            dim: 1,
            form: Form::Reflection,
        }
    }

    /// The 1-D step map: `low` on `(−∞, cut]`, `high` on `(cut, ∞)`.
    pub fn threshold(cut: f64, low: f64, high: f64) -> Result<Self, OperatorError> {
        for (name, v) in [("cut", cut), ("low", low), ("high", high)] {
            if !v.is_finite() {
                return Err(OperatorError::NonFiniteParameter(name));
            }
        }
        Ok(Operator {
            dim: 1,
            form: Form::Threshold { cut, low, high },
        })
    }

    /// The `exponent`-fold iterate of `self`.
    pub fn power(&self, exponent: u32) -> Result<Operator, OperatorError> {
        if exponent == 0 {
            return Err(OperatorError::ZeroExponent);
        }
        Ok(Operator {
            dim: self.dim,
            form: Form::Power {
                base: Box::new(self.clone()),
                exponent,
            },
        })
    }

    /// `outer ∘ inner`.
    pub fn composed(outer: Operator, inner: Operator) -> Result<Operator, OperatorError> {
        if outer.dim != inner.dim {
            return Err(OperatorError::ComposeMismatch {
                outer: outer.dim,
                inner: inner.dim,
            });
        }
        Ok(Operator {
            dim: inner.dim,
            form: Form::Composed {
                outer: Box::new(outer),
                inner: Box::new(inner),
            },
        })
    }

    /// `x ↦ (1 − λ)x + λ·self(x)`, `λ ∈ (0, 1]`.
    pub fn averaged(&self, lambda: f64) -> Result<Operator, OperatorError> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(OperatorError::BadLambda(lambda));
        }
        Ok(Operator {
            dim: self.dim,
            form: Form::Averaged {
                base: Box::new(self.clone()),
                lambda,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The matrix and offset when `self` is a plain affine map.
    pub fn as_affine(&self) -> Option<(&Matrix, &RealVector)> {
        match &self.form {
            Form::Affine { matrix, offset } => Some((matrix, offset)),
            _ => None,
        }
    }

    /// `T(x)`.
    pub fn evaluate(&self, x: &RealVector) -> Result<RealVector, OperatorError> {
        x.check_dim(self.dim)?;
        x.check_finite()?;
        let y = self.eval_unchecked(x)?;
        if let Some(index) = y.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(OperatorError::NonFiniteOutput { index });
        }
        Ok(y)
    }

    fn eval_unchecked(&self, x: &RealVector) -> Result<RealVector, OperatorError> {
        Ok(match &self.form {
            Form::Affine { matrix, offset } => RealVector::from_raw(
                matrix
                    .mul_vec(x.as_slice())
                    .into_iter()
                    .zip(offset.as_slice())
                    .map(|(ax, u)| ax + u)
                    .collect(),
            ),
            Form::Reflection => RealVector::from_raw(vec![1.0 - x[0]]),
            Form::Threshold { cut, low, high } => {
                RealVector::from_raw(vec![if x[0] <= *cut { *low } else { *high }])
            }
            Form::Power { base, exponent } => {
                let mut y = base.evaluate(x)?;
                for _ in 1..*exponent {
                    y = base.evaluate(&y)?;
                }
                y
            }
            Form::Composed { outer, inner } => outer.evaluate(&inner.evaluate(x)?)?,
            Form::Averaged { base, lambda } => average_step(x, &base.evaluate(x)?, *lambda)?,
        })
    }
}

/// One averaged step `(1 − λ)x + λ·tx`; with `λ = 1` returns `tx` untouched.
pub fn average_step(x: &RealVector, tx: &RealVector, lambda: f64) -> Result<RealVector, SpaceError> {
    if lambda == 1.0 {
        tx.check_dim(x.dim())?;
        return Ok(tx.clone());
    }
    spaces::combine(1.0 - lambda, x, lambda, tx)
}

/// `‖T(x) − x‖`.
pub fn residual(op: &Operator, x: &RealVector, spec: &NormSpec) -> Result<f64, OperatorError> {
    let tx = op.evaluate(x)?;
    Ok(spec.distance(&tx, x)?)
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Affine { .. } => write!(f, "affine[{}]", self.dim),
            Form::Reflection => f.write_str("reflection"),
            Form::Threshold { cut, low, high } => write!(f, "threshold({cut}, {low}, {high})"),
            Form::Power { base, exponent } => write!(f, "({base})^{exponent}"),
            Form::Composed { outer, inner } => write!(f, "{outer} ∘ {inner}"),
            Form::Averaged { base, lambda } => write!(f, "avg[{lambda}]({base})"),
        }
    }
}

/// A known fixed point, checked against its residual tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReference {
    pub point: RealVector,
    pub residual_tolerance: f64,
}

impl FixedPointReference {
    pub fn new(point: RealVector, residual_tolerance: f64) -> Self {
        FixedPointReference {
            point,
            residual_tolerance,
        }
    }

    /// Whether `‖T(p) − p‖ ≤ residual_tolerance`; returns the residual either way.
    pub fn verify(&self, op: &Operator, spec: &NormSpec) -> Result<(bool, f64), OperatorError> {
        let r = residual(op, &self.point, spec)?;
        Ok((r <= self.residual_tolerance, r))
    }
}
