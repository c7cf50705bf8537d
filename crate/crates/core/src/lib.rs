//! Wasserstein regression for approximating transfer operators from
//! distributional snapshots.
//!
//! Given a sequence of probability measures `mu_1, ..., mu_m` with no
//! sample-to-sample correspondence, the fitting routines search for a map `S`
//! (linear, or a linear combination of basis functions) minimizing
//! `sum_i W2^2(S#mu_i, mu_{i+1})` by gradient descent, where each gradient is
//! assembled from optimal couplings between the pushed snapshot and its
//! successor.

// Negated comparisons such as `!(x > 0.0)` are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod measures;
pub mod wasserstein;

pub use error::{PfoError, Result};
pub use fit::{
    empirical_cost, empirical_gradient, fit_basis_empirical, fit_linear_gaussian, gaussian_cost,
    gaussian_gradient, pseudo_metric, pseudo_metric_gaussian_linear, Backtracking, BasisEvaluator,
    BasisFamily, BasisModel, DescentConfig, FitStatus, FitTrace, IdentityBasis, TraceRecord, averaged_monge_init,
};
pub use measures::{
    ar1_covariance_sequence, empirical_pushforward, gaussian_pushforward_linear, sample_gaussian,
    uniform_grid_1d, uniform_random_1d, Ar1Config, EmpiricalMeasure, GaussianMeasure,
};
pub use wasserstein::{monge_map_gaussian, solve_discrete_ot, w2_empirical, w2_gaussian, AffineMap, Coupling};

pub use nalgebra::{DMatrix, DVector};
