//! Trajectory-based reference methods: Ulam's box discretization, EDMD and
//! plain least-squares DMD.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{PfoError, Result};

/// Axis-aligned tensor grid of boxes over `[lower, upper]`.
///
/// Boxes are half-open on the upper side except along the outer boundary, so
/// every point of the closed region belongs to exactly one box. Box indices are
/// row-major with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamGrid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
}

impl UlamGrid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let d = lower.len();
        if d == 0 || upper.len() != d || counts.len() != d {
            return Err(PfoError::InvalidArgument("grid bounds and counts must share a positive dimension".into()));
        }
        for axis in 0..d {
            if !(lower[axis].is_finite() && upper[axis].is_finite() && lower[axis] < upper[axis]) {
                return Err(PfoError::InvalidArgument(format!("axis {axis} has empty or non-finite bounds")));
            }
            if counts[axis] == 0 {
                return Err(PfoError::InvalidArgument(format!("axis {axis} has no boxes")));
            }
        }
        Ok(Self { lower, upper, counts })
    }

    pub fn interval(lower: f64, upper: f64, boxes: usize) -> Result<Self> {
        Self::new(vec![lower], vec![upper], vec![boxes])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn n_boxes(&self) -> usize {
        self.counts.iter().product()
    }

    fn width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.counts[axis] as f64
    }

    fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = index % self.counts[axis];
            index /= self.counts[axis];
        }
        out
    }

    /// Lower and upper corners of box `index`.
    pub fn box_bounds(&self, index: usize) -> (Vec<f64>, Vec<f64>) {
        let cell = self.multi_index(index);
        let lo: Vec<f64> = (0..self.dim()).map(|a| self.lower[a] + cell[a] as f64 * self.width(a)).collect();
        let hi: Vec<f64> = (0..self.dim())
            .map(|a| if cell[a] + 1 == self.counts[a] { self.upper[a] } else { self.lower[a] + (cell[a] + 1) as f64 * self.width(a) })
            .collect();
        (lo, hi)
    }

    /// Index of the box containing `x`, or `None` outside the grid.
    pub fn locate(&self, x: &DVector<f64>) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut index = 0usize;
        for axis in 0..self.dim() {
            let v = x[axis];
            if !(v >= self.lower[axis] && v <= self.upper[axis]) {
                return None;
            }
            let cell = (((v - self.lower[axis]) / self.width(axis)).floor() as usize).min(self.counts[axis] - 1);
            index = index * self.counts[axis] + cell;
        }
        Some(index)
    }
}

/// Ulam transition matrix: `probs[(i, j)]` is the fraction of box `i`'s test
/// points mapped into box `j`; `escape[i]` is the fraction mapped off the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamMatrix {
    pub probs: DMatrix<f64>,
    pub samples_per_box: usize,
    pub escape: Vec<f64>,
}

/// Ulam's method with `k` uniform test points per box. Each box draws from its
/// own stream of a seed-derived generator, so the result does not depend on
/// scheduling.
pub fn ulam_matrix<F>(map: F, grid: &UlamGrid, k: usize, seed: u64) -> Result<UlamMatrix>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    if k == 0 {
        return Err(PfoError::InvalidArgument("at least one test point per box is required".into()));
    }
    let n = grid.n_boxes();
    let rows: Vec<(Vec<usize>, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (lo, hi) = grid.box_bounds(i);
            let mut hits = vec![0usize; n];
            let mut escaped = 0usize;
            for _ in 0..k {
                let x = DVector::from_iterator(lo.len(), lo.iter().zip(&hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()));
                match grid.locate(&map(&x)) {
                    Some(j) => hits[j] += 1,
                    None => escaped += 1,
                }
            }
            (hits, escaped)
        })
        .collect();

    let mut probs = DMatrix::zeros(n, n);
    let mut escape = Vec::with_capacity(n);
    let kf = k as f64;
    for (i, (hits, escaped)) in rows.into_iter().enumerate() {
        for (j, h) in hits.into_iter().enumerate() {
            probs[(i, j)] = h as f64 / kf;
        }
        escape.push(escaped as f64 / kf);
    }
    Ok(UlamMatrix {
        probs,
        samples_per_box: k,
        escape,
    })
}

/// A scalar observable for EDMD dictionaries.
pub type Observable = Box<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// Result of a minimum-norm least-squares fit `Y = K X`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub operator: DMatrix<f64>,
    /// Numerical rank of the regressor matrix `X`.
    pub rank: usize,
}

impl LeastSquaresFit {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.operator.ncols()
    }
}

/// Minimum-norm `K` minimizing `|Y - K X|_F`, via the SVD pseudo-inverse of `X`.
fn min_norm_fit(y: &DMatrix<f64>, x: &DMatrix<f64>) -> LeastSquaresFit {
    let svd = x.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let tol = sigma_max * f64::EPSILON * x.nrows().max(x.ncols()) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol && s > 0.0).count();
    let pinv = if rank == 0 {
        DMatrix::zeros(x.ncols(), x.nrows())
    } else {
        svd.pseudo_inverse(tol).expect("u and v were computed")
    };
    LeastSquaresFit {
        operator: y * pinv,
        rank,
    }
}

fn snapshot_matrices<F>(trajectory: &[DVector<f64>], lift: F, rows: usize) -> (DMatrix<f64>, DMatrix<f64>)
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let m = trajectory.len();
    let lifted: Vec<DVector<f64>> = trajectory.iter().map(lift).collect();
    let mut past = DMatrix::zeros(rows, m - 1);
    let mut future = DMatrix::zeros(rows, m - 1);
    for t in 0..m - 1 {
        past.set_column(t, &lifted[t]);
        future.set_column(t, &lifted[t + 1]);
    }
    (past, future)
}

fn check_trajectory(trajectory: &[DVector<f64>]) -> Result<usize> {
    if trajectory.len() < 2 {
        return Err(PfoError::InvalidArgument("trajectory needs at least two states".into()));
    }
    let d = trajectory[0].len();
    for x in trajectory {
        if x.len() != d {
            return Err(PfoError::DimensionMismatch { expected: d, got: x.len() });
        }
    }
    Ok(d)
}

/// Extended DMD: least-squares `K` with `Phi_[2,m] = K Phi_[1,m-1]` over the
/// dictionary values. Rank deficiency is reported through
/// [`LeastSquaresFit::rank`]; the minimum-norm solution is returned.
pub fn edmd_fit(trajectory: &[DVector<f64>], dictionary: &[Observable]) -> Result<LeastSquaresFit> {
    check_trajectory(trajectory)?;
    if dictionary.is_empty() {
        return Err(PfoError::InvalidArgument("dictionary must not be empty".into()));
    }
    let k = dictionary.len();
    let (past, future) = snapshot_matrices(trajectory, |x| DVector::from_iterator(k, dictionary.iter().map(|phi| phi(x))), k);
    Ok(min_norm_fit(&future, &past))
}

/// Coordinate functions `x -> x_i`, i = 0..d.
pub fn coordinate_dictionary(d: usize) -> Vec<Observable> {
    (0..d).map(|i| Box::new(move |x: &DVector<f64>| x[i]) as Observable).collect()
}

/// Ordinary DMD: minimizer of `sum_i |A x_i - x_{i+1}|^2` (minimum norm).
pub fn dmd_least_squares(trajectory: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let d = check_trajectory(trajectory)?;
    let (past, future) = snapshot_matrices(trajectory, |x| x.clone(), d);
    Ok(min_norm_fit(&future, &past).operator)
}
