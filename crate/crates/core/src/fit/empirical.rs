//! Basis-model fits on point-cloud snapshots. Each gradient evaluation solves
//! one exact transport problem per consecutive snapshot pair.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{PfoError, Result};
use crate::fit::basis::{BasisFamily, BasisModel};
use crate::fit::descent::{descend, DescentConfig, Evaluation, FitTrace};
use crate::measures::{empirical_pushforward, EmpiricalMeasure};
use crate::wasserstein::solve_discrete_ot;

fn check_snapshots(model: &BasisModel, snapshots: &[EmpiricalMeasure]) -> Result<()> {
    if snapshots.len() < 2 {
        return Err(PfoError::InvalidArgument("at least two snapshots are required".into()));
    }
    for s in snapshots {
        if s.dim() != model.dim() {
            return Err(PfoError::DimensionMismatch {
                expected: model.dim(),
                got: s.dim(),
            });
        }
    }
    Ok(())
}

struct PairTerm {
    cost: f64,
    grad: DVector<f64>,
    plan: Vec<(usize, usize, f64)>,
}

fn pair_term(model: &BasisModel, source: &EmpiricalMeasure, target: &EmpiricalMeasure, with_grad: bool) -> Result<PairTerm> {
    let pushed = empirical_pushforward(source, |x| model.eval(x))?;
    let coupling = solve_discrete_ot(&pushed, target)?;
    let mut grad = DVector::zeros(model.theta().len());
    if with_grad {
        let mut basis_cache: Vec<Option<nalgebra::DMatrix<f64>>> = vec![None; source.len()];
        for &(j, k, mass) in coupling.entries() {
            let y = basis_cache[j].get_or_insert_with(|| model.basis(&source.points()[j]));
            let residual = &pushed.points()[j] - &target.points()[k];
            grad.gemv_tr(2.0 * mass, y, &residual, 1.0);
        }
    }
    Ok(PairTerm {
        cost: coupling.cost(),
        grad,
        plan: coupling.entries().to_vec(),
    })
}

fn evaluate(model: &BasisModel, snapshots: &[EmpiricalMeasure], with_grad: bool) -> Result<Vec<PairTerm>> {
    // Pairs are independent; collecting preserves pair order so the reduction
    // below is the same regardless of scheduling.
    snapshots
        .par_windows(2)
        .map(|pair| pair_term(model, &pair[0], &pair[1], with_grad))
        .collect()
}

/// `F(theta) = sum_i W2^2(S(.; theta)#mu_i, mu_{i+1})`.
pub fn empirical_cost(model: &BasisModel, snapshots: &[EmpiricalMeasure]) -> Result<f64> {
    check_snapshots(model, snapshots)?;
    Ok(evaluate(model, snapshots, false)?.iter().map(|t| t.cost).sum())
}

/// `grad F = 2 sum_i sum_{j,k} plan_jk Y(x_j)^T (S(x_j; theta) - y_k)` with the
/// optimal plan between the pushed snapshot and its successor.
pub fn empirical_gradient(model: &BasisModel, snapshots: &[EmpiricalMeasure]) -> Result<DVector<f64>> {
    check_snapshots(model, snapshots)?;
    let terms = evaluate(model, snapshots, true)?;
    let mut grad = DVector::zeros(model.theta().len());
    for t in &terms {
        grad += &t.grad;
    }
    Ok(grad)
}

fn cost_and_gradient(model: &BasisModel, snapshots: &[EmpiricalMeasure], keep_plans: bool) -> Result<Evaluation> {
    let terms = evaluate(model, snapshots, true)?;
    let mut grad = DVector::zeros(model.theta().len());
    let mut cost = 0.0;
    let mut plans = Vec::new();
    for t in terms {
        cost += t.cost;
        grad += &t.grad;
        if keep_plans {
            plans.push(t.plan);
        }
    }
    Ok(Evaluation { cost, grad, plans })
}

/// Gradient descent over the parameters of `family`, starting from `theta_init`.
pub fn fit_basis_empirical(
    snapshots: &[EmpiricalMeasure],
    family: &BasisFamily,
    cfg: &DescentConfig,
    theta_init: &DVector<f64>,
) -> Result<(DVector<f64>, FitTrace)> {
    let template = BasisModel::new(family.clone(), theta_init.clone())?;
    check_snapshots(&template, snapshots)?;
    descend(theta_init.clone(), cfg, snapshots.len() - 1, |theta| {
        let model = template.with_theta(theta.clone())?;
        cost_and_gradient(&model, snapshots, cfg.record_plans)
    })
}

/// `inf_{S in family} W2^2(S#mu0, mu1)` as reached by a two-snapshot fit.
///
/// Starts from `theta_init`, or from the identity when the family contains it.
/// Returns the smallest cost visited, so starting at the identity never
/// exceeds `W2^2(mu0, mu1)`.
pub fn pseudo_metric(
    mu0: &EmpiricalMeasure,
    mu1: &EmpiricalMeasure,
    family: &BasisFamily,
    cfg: &DescentConfig,
    theta_init: Option<&DVector<f64>>,
) -> Result<f64> {
    let init = match theta_init {
        Some(t) => t.clone(),
        None => family
            .identity_params()
            .ok_or_else(|| PfoError::InvalidArgument("family has no identity; pass an explicit start".into()))?,
    };
    let snapshots = [mu0.clone(), mu1.clone()];
    let (_, trace) = fit_basis_empirical(&snapshots, family, cfg, &init)?;
    Ok(trace.min_cost())
}
