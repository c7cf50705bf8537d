//! Probability measures: Gaussians, weighted point clouds, pushforwards and
//! the synthetic snapshot generators used by the experiments.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PfoError, Result};
use crate::linalg::{max_abs, sqrt_spd, sym_eig, symmetrize};

const COV_SYMMETRY_TOL: f64 = 1e-12;
const COV_PSD_TOL: f64 = 1e-10;
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A Gaussian `N(mean, cov)` with symmetric PSD covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianMeasure {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(PfoError::InvalidMeasure("dimension must be at least 1".into()));
        }
        if cov.shape() != (d, d) {
            return Err(PfoError::DimensionMismatch {
                expected: d,
                got: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(PfoError::InvalidMeasure("non-finite entries".into()));
        }
        let asymmetry = max_abs(&(&cov - cov.transpose()));
        if asymmetry > COV_SYMMETRY_TOL * (1.0 + max_abs(&cov)) {
            return Err(PfoError::NotSymmetric { asymmetry });
        }
        let eig = sym_eig(&cov)?;
        let largest = eig.largest().max(0.0);
        if eig.smallest() < -COV_PSD_TOL * largest {
            return Err(PfoError::NotPositiveSemidefinite {
                eigenvalue: eig.smallest(),
                largest,
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn zero_mean(cov: DMatrix<f64>) -> Result<Self> {
        Self::new(DVector::zeros(cov.nrows()), cov)
    }

    pub fn standard(d: usize) -> Self {
        Self {
            mean: DVector::zeros(d),
            cov: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
}

/// A finitely supported probability measure: points with nonnegative weights summing to one.
///
/// A Dirac measure is the single-point case.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(PfoError::InvalidMeasure("at least one point is required".into()));
        }
        if points.len() != weights.len() {
            return Err(PfoError::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(PfoError::InvalidMeasure("dimension must be at least 1".into()));
        }
        for p in &points {
            if p.len() != d {
                return Err(PfoError::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
        }
        if let Some(index) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(PfoError::NonFinite { index });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(PfoError::InvalidMeasure("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(PfoError::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { points, weights })
    }

    /// Uniform weights `1/n`.
    pub fn uniform(points: Vec<DVector<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn dirac(x: DVector<f64>) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    /// Builds a uniform 1-D measure from scalar positions.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::uniform(xs.iter().map(|&x| DVector::from_element(1, x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every weight equals `1/n` up to round-off.
    pub fn has_uniform_weights(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|x| (x - w).abs() <= 1e-15)
    }

    /// Weighted sample covariance around the weighted mean.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut mean = DVector::zeros(d);
        for (p, w) in self.points.iter().zip(&self.weights) {
            mean.axpy(*w, p, 1.0);
        }
        let mut cov = DMatrix::zeros(d, d);
        for (p, w) in self.points.iter().zip(&self.weights) {
            let c = p - &mean;
            cov.ger(*w, &c, &c, 1.0);
        }
        cov
    }
}

/// Pushforward of a Gaussian under `x -> a x`: `N(a m, a C a^T)`.
pub fn gaussian_pushforward_linear(g: &GaussianMeasure, a: &DMatrix<f64>) -> Result<GaussianMeasure> {
    let d = g.dim();
    if a.shape() != (d, d) {
        return Err(PfoError::DimensionMismatch {
            expected: d,
            got: if a.nrows() != d { a.nrows() } else { a.ncols() },
        });
    }
    Ok(GaussianMeasure {
        mean: a * &g.mean,
        cov: symmetrize(&(a * &g.cov * a.transpose())),
    })
}

/// Pushforward of a point cloud under a deterministic map. Weights are carried over unchanged.
pub fn empirical_pushforward<F>(e: &EmpiricalMeasure, map: F) -> Result<EmpiricalMeasure>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let d = e.dim();
    let mut points = Vec::with_capacity(e.len());
    for (index, p) in e.points.iter().enumerate() {
        let y = map(p);
        if y.len() != d {
            return Err(PfoError::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(PfoError::NonFinite { index });
        }
        points.push(y);
    }
    Ok(EmpiricalMeasure {
        points,
        weights: e.weights.clone(),
    })
}

/// Draws `n` i.i.d. samples from `g` with uniform weights, deterministic in `seed`.
pub fn sample_gaussian(g: &GaussianMeasure, n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(PfoError::InvalidArgument("sample count must be at least 1".into()));
    }
    let root = sqrt_spd(&g.cov)?;
    let d = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let z = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(&mut rng)));
            &g.mean + &root * z
        })
        .collect();
    EmpiricalMeasure::uniform(points)
}

/// Midpoint quantile grid `(k - 1/2) / n`, k = 1..n, with uniform weights.
pub fn uniform_grid_1d(n: usize) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(PfoError::InvalidArgument("grid size must be at least 1".into()));
    }
    let xs: Vec<f64> = (1..=n).map(|k| (k as f64 - 0.5) / n as f64).collect();
    EmpiricalMeasure::from_scalars(&xs)
}

/// `n` i.i.d. uniform draws on `[0, 1]`, sorted, with uniform weights.
pub fn uniform_random_1d(n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    use rand::Rng;
    if n == 0 {
        return Err(PfoError::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    EmpiricalMeasure::from_scalars(&xs)
}

/// Zero-mean linear autoregressive process `x_{k+1} = A0 x_k + w_k`, `w_k ~ N(0, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Config {
    pub a0: DMatrix<f64>,
    pub noise_cov: DMatrix<f64>,
    pub c1: DMatrix<f64>,
    pub steps: usize,
}

impl Ar1Config {
    /// The two-dimensional example: `A0 = [[-1/2, 2], [-1, 3/2]]`, noise `(2/5) dw`, `C1 = I`, six snapshots.
    pub fn reference() -> Self {
        Self {
            a0: DMatrix::from_row_slice(2, 2, &[-0.5, 2.0, -1.0, 1.5]),
            noise_cov: DMatrix::identity(2, 2) * (0.4 * 0.4),
            c1: DMatrix::identity(2, 2),
            steps: 6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.a0.nrows();
        for m in [&self.a0, &self.noise_cov, &self.c1] {
            if m.shape() != (d, d) {
                return Err(PfoError::DimensionMismatch {
                    expected: d,
                    got: m.nrows(),
                });
            }
        }
        if self.steps < 2 {
            return Err(PfoError::InvalidArgument("at least two snapshots are required".into()));
        }
        GaussianMeasure::zero_mean(self.noise_cov.clone())?;
        GaussianMeasure::zero_mean(self.c1.clone())?;
        Ok(())
    }
}

/// Exact covariance recursion `C_{k+1} = A0 C_k A0^T + Q` starting from `N(0, C1)`.
pub fn ar1_covariance_sequence(cfg: &Ar1Config) -> Result<Vec<GaussianMeasure>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.steps);
    let mut cov = cfg.c1.clone();
    out.push(GaussianMeasure::zero_mean(cov.clone())?);
    for _ in 1..cfg.steps {
        cov = symmetrize(&(&cfg.a0 * &cov * cfg.a0.transpose() + &cfg.noise_cov));
        out.push(GaussianMeasure::zero_mean(cov.clone())?);
    }
    Ok(out)
}
