//! Shared inputs for the benchmarks.

use pfo_core::{
    ar1_covariance_sequence, empirical_pushforward, sample_gaussian, uniform_grid_1d, Ar1Config, BasisFamily,
    BasisModel, DMatrix, DVector, EmpiricalMeasure, GaussianMeasure,
};

/// Two `n`-point samples of offset Gaussians in dimension `d`.
pub fn gaussian_clouds(n: usize, d: usize, seed: u64) -> (EmpiricalMeasure, EmpiricalMeasure) {
    let g0 = GaussianMeasure::standard(d);
    let shifted = DVector::from_element(d, 1.0);
    let cov = DMatrix::from_fn(d, d, |i, j| if i == j { 2.0 } else { 0.5 });
    let g1 = GaussianMeasure::new(shifted, cov).expect("valid Gaussian");
    let s0 = sample_gaussian(&g0, n, seed).expect("sampling succeeds");
    let s1 = sample_gaussian(&g1, n, seed + 1).expect("sampling succeeds");
    (s0, s1)
}

/// Covariances of the reference two-dimensional AR(1) process.
pub fn ar1_covariances() -> Vec<DMatrix<f64>> {
    ar1_covariance_sequence(&Ar1Config::reference())
        .expect("reference process is well posed")
        .into_iter()
        .map(|g| g.cov().clone())
        .collect()
}

/// Grid snapshots of the cubic reference map, with the model at its usual initial guess.
pub fn cubic_problem(n: usize) -> (BasisModel, Vec<EmpiricalMeasure>) {
    let truth = BasisModel::new(BasisFamily::cubic(), DVector::from_vec(vec![-0.8, 0.6, 0.7])).expect("valid model");
    let x0 = uniform_grid_1d(n).expect("non-empty grid");
    let x1 = empirical_pushforward(&x0, |x| truth.eval(x)).expect("finite pushforward");
    let init = truth.with_theta(DVector::from_vec(vec![-2.0, 0.0, 2.0])).expect("valid model");
    (init, vec![x0, x1])
}
