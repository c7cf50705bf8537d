//! Basis-parametrized maps `S(x; theta) = offset(x) + Y(x) theta`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{PfoError, Result};

/// User-supplied basis: `Y(x)` is a `dim x n_params` matrix whose columns are
/// the basis functions evaluated at `x`.
pub trait BasisEvaluator: Send + Sync {
    fn dim(&self) -> usize;
    fn n_params(&self) -> usize;
    fn eval(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// Fixed, unparametrized part of the map. Zero unless overridden.
    fn offset(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }
    fn name(&self) -> String {
        "custom".into()
    }
}

/// The families a [`BasisModel`] can be drawn from.
#[derive(Clone)]
pub enum BasisFamily {
    /// `S(x) = A x`, parameters are `A` in row-major order.
    Linear { dim: usize },
    /// `S(x) = A x + b`, parameters are row-major `A` followed by `b`.
    Affine { dim: usize },
    /// One-dimensional `S(x) = sum_p theta_p (1 - x)^{e_p}`, ordered as `exponents`.
    ShiftedMonomials { exponents: Vec<u32> },
    Custom(Arc<dyn BasisEvaluator>),
}

impl fmt::Debug for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { dim } => write!(f, "Linear {{ dim: {dim} }}"),
            Self::Affine { dim } => write!(f, "Affine {{ dim: {dim} }}"),
            Self::ShiftedMonomials { exponents } => write!(f, "ShiftedMonomials {{ exponents: {exponents:?} }}"),
            Self::Custom(e) => write!(f, "Custom({})", e.name()),
        }
    }
}

/// Identity-only family: no parameters, `S(x) = x`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityBasis {
    pub dim: usize,
}

impl BasisEvaluator for IdentityBasis {
    fn dim(&self) -> usize {
        self.dim
    }
    fn n_params(&self) -> usize {
        0
    }
    fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), 0)
    }
    fn offset(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn name(&self) -> String {
        "identity".into()
    }
}

impl BasisFamily {
    /// The cubic family `{(1-x)^3, (1-x), 1}`.
    pub fn cubic() -> Self {
        Self::ShiftedMonomials {
            exponents: vec![3, 1, 0],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Linear { dim } | Self::Affine { dim } => *dim,
            Self::ShiftedMonomials { .. } => 1,
            Self::Custom(e) => e.dim(),
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Self::Linear { dim } => dim * dim,
            Self::Affine { dim } => dim * dim + dim,
            Self::ShiftedMonomials { exponents } => exponents.len(),
            Self::Custom(e) => e.n_params(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Linear { .. } => "linear".into(),
            Self::Affine { .. } => "affine".into(),
            Self::ShiftedMonomials { .. } => "shifted-monomials-1d".into(),
            Self::Custom(e) => e.name(),
        }
    }

    /// `Y(x)`, a `dim x n_params` matrix.
    pub fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            Self::Linear { dim } | Self::Affine { dim } => {
                let d = *dim;
                let mut y = DMatrix::zeros(d, self.n_params());
                for j in 0..d {
                    for k in 0..d {
                        y[(j, j * d + k)] = x[k];
                    }
                }
                if matches!(self, Self::Affine { .. }) {
                    for j in 0..d {
                        y[(j, d * d + j)] = 1.0;
                    }
                }
                y
            }
            Self::ShiftedMonomials { exponents } => {
                let u = 1.0 - x[0];
                DMatrix::from_iterator(1, exponents.len(), exponents.iter().map(|&p| u.powi(p as i32)))
            }
            Self::Custom(e) => e.eval(x),
        }
    }

    pub fn offset(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Custom(e) => e.offset(x),
            _ => DVector::zeros(x.len()),
        }
    }

    /// Parameters realizing the identity map, if the family contains it.
    pub fn identity_params(&self) -> Option<DVector<f64>> {
        match self {
            Self::Linear { dim } | Self::Affine { dim } => {
                let d = *dim;
                let mut theta = DVector::zeros(self.n_params());
                for j in 0..d {
                    theta[j * d + j] = 1.0;
                }
                Some(theta)
            }
            Self::ShiftedMonomials { exponents } => {
                // x = 1 - (1 - x)
                let zero = exponents.iter().position(|&p| p == 0)?;
                let one = exponents.iter().position(|&p| p == 1)?;
                let mut theta = DVector::zeros(exponents.len());
                theta[zero] = 1.0;
                theta[one] = -1.0;
                Some(theta)
            }
            Self::Custom(e) if e.n_params() == 0 => Some(DVector::zeros(0)),
            Self::Custom(_) => None,
        }
    }
}

/// A family together with a parameter vector.
#[derive(Debug, Clone)]
pub struct BasisModel {
    family: BasisFamily,
    theta: DVector<f64>,
}

impl BasisModel {
    pub fn new(family: BasisFamily, theta: DVector<f64>) -> Result<Self> {
        if theta.len() != family.n_params() {
            return Err(PfoError::DimensionMismatch {
                expected: family.n_params(),
                got: theta.len(),
            });
        }
        Ok(Self { family, theta })
    }

    /// Linear model `x -> a x`.
    pub fn linear(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(PfoError::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let d = a.nrows();
        let theta = DVector::from_iterator(d * d, (0..d).flat_map(|j| (0..d).map(move |k| a[(j, k)])));
        Self::new(BasisFamily::Linear { dim: d }, theta)
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn with_theta(&self, theta: DVector<f64>) -> Result<Self> {
        Self::new(self.family.clone(), theta)
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn basis(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.family.eval(x)
    }

    /// `S(x; theta)`.
    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.family {
            BasisFamily::Linear { dim } => DMatrix::from_row_slice(*dim, *dim, self.theta.as_slice()) * x,
            _ => self.family.offset(x) + self.family.eval(x) * &self.theta,
        }
    }

    /// Row-major reshape of the parameters for the linear and affine families.
    pub fn matrix(&self) -> Option<DMatrix<f64>> {
        match &self.family {
            BasisFamily::Linear { dim } | BasisFamily::Affine { dim } => {
                let d = *dim;
                Some(DMatrix::from_row_slice(d, d, &self.theta.as_slice()[..d * d]))
            }
            _ => None,
        }
    }
}
