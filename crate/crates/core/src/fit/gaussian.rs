//! Linear fits on zero-mean Gaussian snapshots, where every Wasserstein term
//! and its gradient has a closed form in the covariances.

use nalgebra::{DMatrix, DVector};

use crate::error::{PfoError, Result};
use crate::fit::descent::{descend, DescentConfig, Evaluation, FitTrace};
use crate::linalg::{condition_estimate, inverse, sqrt_product, sqrt_spd, symmetrize, SINGULAR_CONDITION};
use crate::measures::GaussianMeasure;
use crate::wasserstein::monge_map_gaussian;

fn check_inputs(a: &DMatrix<f64>, covs: &[DMatrix<f64>]) -> Result<()> {
    if covs.len() < 2 {
        return Err(PfoError::InvalidArgument("at least two covariances are required".into()));
    }
    let d = a.nrows();
    if a.ncols() != d {
        return Err(PfoError::DimensionMismatch {
            expected: d,
            got: a.ncols(),
        });
    }
    for c in covs {
        if c.shape() != (d, d) {
            return Err(PfoError::DimensionMismatch {
                expected: d,
                got: c.nrows(),
            });
        }
    }
    Ok(())
}

/// `F(A) = sum_i tr(A C_i A^T + C_{i+1} - 2 (C_{i+1}^{1/2} A C_i A^T C_{i+1}^{1/2})^{1/2})`.
pub fn gaussian_cost(a: &DMatrix<f64>, covs: &[DMatrix<f64>]) -> Result<f64> {
    check_inputs(a, covs)?;
    let mut total = 0.0;
    for pair in covs.windows(2) {
        let pushed = symmetrize(&(a * &pair[0] * a.transpose()));
        let target_half = sqrt_spd(&pair[1])?;
        let cross = sqrt_spd(&symmetrize(&(&target_half * &pushed * &target_half)))?;
        let term = pushed.trace() + pair[1].trace() - 2.0 * cross.trace();
        total += term.max(0.0);
    }
    Ok(total)
}

/// `grad F = 2 { A sum_i C_i - (sum_i (C_{i+1} A C_i A^T)^{1/2}) A^{-T} }`.
pub fn gaussian_gradient(a: &DMatrix<f64>, covs: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    check_inputs(a, covs)?;
    let a_inv = inverse(a)?;
    let d = a.nrows();
    let mut source_sum = DMatrix::zeros(d, d);
    let mut roots = DMatrix::zeros(d, d);
    for pair in covs.windows(2) {
        source_sum += &pair[0];
        let pushed = symmetrize(&(a * &pair[0] * a.transpose()));
        roots += sqrt_product(&pair[1], &pushed)?;
    }
    Ok((a * source_sum - roots * a_inv.transpose()) * 2.0)
}

fn params_to_matrix(theta: &DVector<f64>, d: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, theta.as_slice())
}

fn matrix_to_params(a: &DMatrix<f64>) -> DVector<f64> {
    let d = a.nrows();
    DVector::from_iterator(d * d, (0..d).flat_map(|j| (0..d).map(move |k| a[(j, k)])))
}

/// Gradient descent `A_{n+1} = A_n - step * grad F(A_n)` on the Gaussian cost.
///
/// Iterates are required to stay nonsingular; an iterate whose condition
/// estimate reaches [`SINGULAR_CONDITION`] ends the run with an error status.
pub fn fit_linear_gaussian(covs: &[DMatrix<f64>], cfg: &DescentConfig, a_init: &DMatrix<f64>) -> Result<(DMatrix<f64>, FitTrace)> {
    check_inputs(a_init, covs)?;
    let condition = condition_estimate(a_init);
    if !(condition < SINGULAR_CONDITION) {
        return Err(PfoError::NearSingular { condition });
    }
    let d = a_init.nrows();
    let (theta, trace) = descend(matrix_to_params(a_init), cfg, covs.len() - 1, |theta| {
        let a = params_to_matrix(theta, d);
        let cost = gaussian_cost(&a, covs)?;
        let grad = gaussian_gradient(&a, covs)?;
        Ok(Evaluation {
            cost,
            grad: matrix_to_params(&grad),
            plans: Vec::new(),
        })
    })?;
    Ok((params_to_matrix(&theta, d), trace))
}

/// Mean of the pairwise Monge maps, `(1/(m-1)) sum_i C_i^{-1} (C_i C_{i+1})^{1/2}`.
pub fn averaged_monge_init(covs: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    if covs.len() < 2 {
        return Err(PfoError::InvalidArgument("at least two covariances are required".into()));
    }
    let d = covs[0].nrows();
    let mut sum = DMatrix::zeros(d, d);
    for pair in covs.windows(2) {
        let g0 = GaussianMeasure::zero_mean(pair[0].clone())?;
        let g1 = GaussianMeasure::zero_mean(pair[1].clone())?;
        sum += monge_map_gaussian(&g0, &g1)?.matrix;
    }
    Ok(sum / (covs.len() - 1) as f64)
}

/// Smallest squared distance `inf_A W2^2(A#g0, g1)` reached by a two-snapshot
/// linear fit started at `a_init` (identity when `None`). Zero-mean inputs only.
pub fn pseudo_metric_gaussian_linear(
    g0: &GaussianMeasure,
    g1: &GaussianMeasure,
    cfg: &DescentConfig,
    a_init: Option<&DMatrix<f64>>,
) -> Result<f64> {
    if g0.mean().iter().chain(g1.mean().iter()).any(|&m| m != 0.0) {
        return Err(PfoError::InvalidArgument("linear Gaussian pseudo-metric requires zero means".into()));
    }
    let identity = DMatrix::identity(g0.dim(), g0.dim());
    let init = a_init.unwrap_or(&identity);
    let covs = [g0.cov().clone(), g1.cov().clone()];
    let (_, trace) = fit_linear_gaussian(&covs, cfg, init)?;
    Ok(trace.min_cost())
}
