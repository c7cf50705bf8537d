//! Wasserstein-2 distances and optimal couplings.
//!
//! Empirical measures are matched exactly for the squared Euclidean ground cost.
//! The solver routes by shape:
//!
//! * one-dimensional supports use the monotone (sorted) coupling, which is
//!   optimal for any convex cost on the line;
//! * equal-size uniform clouds reduce to linear assignment;
//! * everything else goes through a successive-shortest-path transportation solve.

mod assignment;
mod gaussian;
mod transport;

use nalgebra::{DMatrix, DVector};

pub use gaussian::{monge_map_gaussian, w2_gaussian, AffineMap};

use crate::error::{PfoError, Result};
use crate::measures::EmpiricalMeasure;

/// An optimal transport plan between two empirical measures, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    /// `(row, col, mass)` sorted by row then column; zero masses are omitted.
    entries: Vec<(usize, usize, f64)>,
    source_weights: Vec<f64>,
    target_weights: Vec<f64>,
    cost: f64,
}

impl Coupling {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn source_weights(&self) -> &[f64] {
        &self.source_weights
    }

    pub fn target_weights(&self) -> &[f64] {
        &self.target_weights
    }

    /// Transport cost `sum plan_jk |x_j - y_k|^2`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, w) in &self.entries {
            m[(i, j)] += w;
        }
        m
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for &(i, _, w) in &self.entries {
            s[i] += w;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for &(_, j, w) in &self.entries {
            s[j] += w;
        }
        s
    }

    /// The matching `row -> col` when the plan is a scaled permutation.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        if self.rows != self.cols || self.entries.len() != self.rows {
            return None;
        }
        let mut perm = vec![usize::MAX; self.rows];
        let mut seen = vec![false; self.cols];
        for &(i, j, _) in &self.entries {
            if perm[i] != usize::MAX || seen[j] {
                return None;
            }
            perm[i] = j;
            seen[j] = true;
        }
        Some(perm)
    }
}

fn squared_distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn plan_cost(e0: &EmpiricalMeasure, e1: &EmpiricalMeasure, entries: &[(usize, usize, f64)]) -> f64 {
    entries
        .iter()
        .map(|&(i, j, w)| w * squared_distance(&e0.points()[i], &e1.points()[j]))
        .sum()
}

fn sorted_order(e: &EmpiricalMeasure) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..e.len()).collect();
    idx.sort_by(|&a, &b| e.points()[a][0].total_cmp(&e.points()[b][0]).then(a.cmp(&b)));
    idx
}

/// North-west corner rule on the sorted supports.
fn monotone_plan(e0: &EmpiricalMeasure, e1: &EmpiricalMeasure) -> Vec<(usize, usize, f64)> {
    const EXHAUSTED: f64 = 1e-15;
    let s0 = sorted_order(e0);
    let s1 = sorted_order(e1);
    let (w0, w1) = (e0.weights(), e1.weights());
    let mut entries = Vec::with_capacity(s0.len() + s1.len());
    let (mut i, mut j) = (0, 0);
    let (mut a, mut b) = (w0[s0[0]], w1[s1[0]]);
    while i < s0.len() && j < s1.len() {
        let m = a.min(b);
        if m > 0.0 {
            entries.push((s0[i], s1[j], m));
        }
        a -= m;
        b -= m;
        if a <= EXHAUSTED {
            i += 1;
            if i < s0.len() {
                a = w0[s0[i]];
            }
        }
        if b <= EXHAUSTED {
            j += 1;
            if j < s1.len() {
                b = w1[s1[j]];
            }
        }
    }
    entries
}

fn assignment_plan(e0: &EmpiricalMeasure, e1: &EmpiricalMeasure) -> Vec<(usize, usize, f64)> {
    let n = e0.len();
    let mut cost = Vec::with_capacity(n * n);
    for x in e0.points() {
        for y in e1.points() {
            cost.push(squared_distance(x, y));
        }
    }
    let assign = assignment::solve_assignment(&cost, n);
    let mass = 1.0 / n as f64;
    assign.into_iter().enumerate().map(|(i, j)| (i, j, mass)).collect()
}

fn transport_plan(e0: &EmpiricalMeasure, e1: &EmpiricalMeasure) -> Vec<(usize, usize, f64)> {
    let rows: Vec<usize> = (0..e0.len()).filter(|&i| e0.weights()[i] > 0.0).collect();
    let cols: Vec<usize> = (0..e1.len()).filter(|&j| e1.weights()[j] > 0.0).collect();
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        for &j in &cols {
            cost.push(squared_distance(&e0.points()[i], &e1.points()[j]));
        }
    }
    let supply: Vec<f64> = rows.iter().map(|&i| e0.weights()[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| e1.weights()[j]).collect();
    transport::solve_transport(&cost, &supply, &demand)
        .into_iter()
        .map(|(i, j, m)| (rows[i], cols[j], m))
        .collect()
}

/// Exact optimal coupling for the squared Euclidean cost.
pub fn solve_discrete_ot(e0: &EmpiricalMeasure, e1: &EmpiricalMeasure) -> Result<Coupling> {
    if e0.dim() != e1.dim() {
        return Err(PfoError::DimensionMismatch {
            expected: e0.dim(),
            got: e1.dim(),
        });
    }
    let mut entries = if e0.dim() == 1 {
        monotone_plan(e0, e1)
    } else if e0.len() == e1.len() && e0.has_uniform_weights() && e1.has_uniform_weights() {
        assignment_plan(e0, e1)
    } else {
        transport_plan(e0, e1)
    };
    entries.sort_by_key(|e| (e.0, e.1));
    let cost = plan_cost(e0, e1, &entries);
    Ok(Coupling {
        rows: e0.len(),
        cols: e1.len(),
        entries,
        source_weights: e0.weights().to_vec(),
        target_weights: e1.weights().to_vec(),
        cost,
    })
}

/// Wasserstein-2 distance between two point clouds.
pub fn w2_empirical(e0: &EmpiricalMeasure, e1: &EmpiricalMeasure) -> Result<f64> {
    Ok(solve_discrete_ot(e0, e1)?.cost().max(0.0).sqrt())
}
