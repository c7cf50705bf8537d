//! Wasserstein regression: objectives, gradients and descent drivers.

mod basis;
mod descent;
mod empirical;
mod gaussian;

pub use basis::{BasisEvaluator, BasisFamily, BasisModel, IdentityBasis};
pub use descent::{Backtracking, DescentConfig, FitStatus, FitTrace, TraceRecord};
pub use empirical::{empirical_cost, empirical_gradient, fit_basis_empirical, pseudo_metric};
pub use gaussian::{
    averaged_monge_init, fit_linear_gaussian, gaussian_cost, gaussian_gradient, pseudo_metric_gaussian_linear,
};
