//! Fixed-step gradient descent with optional Armijo backtracking, shared by
//! the Gaussian and empirical fits.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{PfoError, Result};

/// Armijo line search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backtracking {
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub max_halvings: usize,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self {
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescentConfig {
    /// Learning rate.
    pub step: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls below this value.
    pub grad_tol: f64,
    pub backtracking: Option<Backtracking>,
    /// Step on the objective divided by the number of snapshot pairs. The
    /// recorded cost and gradient norm are always those of the plain sum.
    pub average_pairs: bool,
    /// Keep every iteration's optimal couplings in the trace (empirical fits only).
    pub record_plans: bool,
    pub seed: u64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_iters: 500,
            grad_tol: 1e-6,
            backtracking: None,
            average_pairs: true,
            record_plans: false,
            seed: 0,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(PfoError::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(PfoError::InvalidArgument("grad_tol must be nonnegative".into()));
        }
        if let Some(bt) = &self.backtracking {
            if !(bt.shrink > 0.0 && bt.shrink < 1.0) || !(bt.sufficient_decrease > 0.0 && bt.sufficient_decrease < 1.0) {
                return Err(PfoError::InvalidArgument("backtracking constants must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub cost: f64,
    pub grad_norm: f64,
    pub params: Vec<f64>,
    /// Per snapshot pair `(row, col, mass)` entries, only when plans are recorded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plans: Vec<Vec<(usize, usize, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "reason")]
pub enum FitStatus {
    Converged,
    MaxIters,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub records: Vec<TraceRecord>,
    pub status: FitStatus,
}

impl FitTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    pub fn costs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cost).collect()
    }

    pub fn min_cost(&self) -> f64 {
        self.records.iter().map(|r| r.cost).fold(f64::INFINITY, f64::min)
    }

    pub fn converged(&self) -> bool {
        self.status == FitStatus::Converged
    }
}

/// Objective value, gradient and (optionally) the couplings that produced it.
pub(crate) struct Evaluation {
    pub cost: f64,
    pub grad: DVector<f64>,
    pub plans: Vec<Vec<(usize, usize, f64)>>,
}

/// Runs the descent. Failure of the very first evaluation is returned as an
/// error; later failures end the trace with [`FitStatus::Error`].
pub(crate) fn descend<F>(theta0: DVector<f64>, cfg: &DescentConfig, pairs: usize, mut eval: F) -> Result<(DVector<f64>, FitTrace)>
where
    F: FnMut(&DVector<f64>) -> Result<Evaluation>,
{
    cfg.validate()?;
    let scale = if cfg.average_pairs { 1.0 / pairs.max(1) as f64 } else { 1.0 };
    let mut theta = theta0;
    let mut current = eval(&theta)?;
    if !current.cost.is_finite() {
        return Err(PfoError::NonFinite { index: 0 });
    }
    let mut records = Vec::new();
    let status;
    let mut iter = 0usize;
    loop {
        let grad_norm = current.grad.norm();
        records.push(TraceRecord {
            iter,
            cost: current.cost,
            grad_norm,
            params: theta.as_slice().to_vec(),
            plans: if cfg.record_plans { std::mem::take(&mut current.plans) } else { Vec::new() },
        });
        if grad_norm < cfg.grad_tol {
            status = FitStatus::Converged;
            break;
        }
        if iter >= cfg.max_iters {
            status = FitStatus::MaxIters;
            break;
        }

        let direction = &current.grad * scale;
        let slope = direction.norm_squared();
        let mut step = cfg.step;
        let mut halvings = 0usize;
        let accepted = loop {
            let candidate = &theta - &direction * step;
            let outcome = eval(&candidate).and_then(|e| {
                if e.cost.is_finite() {
                    Ok(e)
                } else {
                    Err(PfoError::NonFinite { index: 0 })
                }
            });
            match (outcome, cfg.backtracking) {
                (Ok(e), None) => break Ok((candidate, e)),
                (Ok(e), Some(bt)) => {
                    // Near a minimum the predicted decrease drops below the rounding
                    // noise of the cost; a candidate where the slope along the
                    // direction is still downhill is then accepted instead.
                    let armijo = scale * e.cost <= scale * current.cost - bt.sufficient_decrease * step * slope;
                    let downhill = e.grad.dot(&direction) >= 0.0;
                    if armijo || downhill {
                        break Ok((candidate, e));
                    }
                    if halvings >= bt.max_halvings {
                        break Err("line search found no sufficient decrease".to_string());
                    }
                }
                (Err(err), None) => break Err(err.to_string()),
                (Err(err), Some(bt)) => {
                    if halvings >= bt.max_halvings {
                        break Err(err.to_string());
                    }
                }
            }
            let bt = cfg.backtracking.expect("only reached with backtracking");
            step *= bt.shrink;
            halvings += 1;
        };
        match accepted {
            Ok((next, e)) => {
                theta = next;
                current = e;
                iter += 1;
            }
            Err(reason) => {
                status = FitStatus::Error(reason);
                break;
            }
        }
    }
    Ok((theta, FitTrace { records, status }))
}
