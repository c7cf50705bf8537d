//! Closed forms for Gaussian measures (Bures-Wasserstein geometry).

use nalgebra::{DMatrix, DVector};

use crate::error::{PfoError, Result};
use crate::linalg::{sqrt_and_inv_sqrt, sqrt_spd, symmetrize};
use crate::measures::GaussianMeasure;

/// `x -> matrix * x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x + &self.offset
    }
}

fn same_dim(g0: &GaussianMeasure, g1: &GaussianMeasure) -> Result<()> {
    if g0.dim() != g1.dim() {
        return Err(PfoError::DimensionMismatch {
            expected: g0.dim(),
            got: g1.dim(),
        });
    }
    Ok(())
}

/// `W2(N(m0, C0), N(m1, C1))`.
pub fn w2_gaussian(g0: &GaussianMeasure, g1: &GaussianMeasure) -> Result<f64> {
    same_dim(g0, g1)?;
    let c1_half = sqrt_spd(g1.cov())?;
    let cross = sqrt_spd(&symmetrize(&(&c1_half * g0.cov() * &c1_half)))?;
    let bures = g0.cov().trace() + g1.cov().trace() - 2.0 * cross.trace();
    let shift = (g0.mean() - g1.mean()).norm_squared();
    Ok((shift + bures.max(0.0)).max(0.0).sqrt())
}

/// Optimal transport map from `g0` to `g1`:
/// `T = C0^{-1/2} (C0^{1/2} C1 C0^{1/2})^{1/2} C0^{-1/2}` with offset `m1 - T m0`.
pub fn monge_map_gaussian(g0: &GaussianMeasure, g1: &GaussianMeasure) -> Result<AffineMap> {
    same_dim(g0, g1)?;
    let (c0_half, c0_inv_half) = sqrt_and_inv_sqrt(g0.cov())?;
    let middle = sqrt_spd(&symmetrize(&(&c0_half * g1.cov() * &c0_half)))?;
    let matrix = symmetrize(&(&c0_inv_half * middle * &c0_inv_half));
    let offset = g1.mean() - &matrix * g0.mean();
    Ok(AffineMap { matrix, offset })
}
