//! Dense kernels for small symmetric and SPD matrices.
//!
//! Everything here targets the handful of dimensions the Gaussian closed forms
//! need (d of a few units), so each routine is a direct O(d^3) decomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{PfoError, Result};

/// Relative asymmetry accepted by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Eigenvalues above `-PSD_CLAMP_TOL * lambda_max` are treated as round-off and clamped to zero.
pub const PSD_CLAMP_TOL: f64 = 1e-10;
/// A matrix whose 2-norm condition estimate reaches this value is rejected as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
/// Smallest eigenvalue ratio accepted for a strictly positive definite factor.
pub const DEFINITE_RATIO: f64 = 1e-12;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITERS: usize = 10_000;

/// Eigen decomposition of a symmetric matrix, eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: DMatrix<f64>,
}

impl SymEig {
    /// Rebuilds `V diag(f(lambda)) V^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        symmetrize(&(scaled * v.transpose()))
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Returns `(x + x^T) / 2`.
pub fn symmetrize(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

pub(crate) fn max_abs(x: &DMatrix<f64>) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn ensure_square(a: &DMatrix<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(PfoError::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Err(PfoError::InvalidArgument("empty matrix".into()));
    }
    Ok(a.nrows())
}

pub fn sym_eig(s: &DMatrix<f64>) -> Result<SymEig> {
    ensure_square(s)?;
    let asymmetry = max_abs(&(s - s.transpose()));
    if asymmetry > SYMMETRY_TOL * (1.0 + max_abs(s)) {
        return Err(PfoError::NotSymmetric { asymmetry });
    }
    let eig = symmetrize(s)
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITERS)
        .ok_or(PfoError::NoConvergence)?;

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

fn check_psd(eig: &SymEig) -> Result<()> {
    let largest = eig.largest().max(0.0);
    let smallest = eig.smallest();
    if smallest < -PSD_CLAMP_TOL * largest || (largest == 0.0 && smallest < 0.0) {
        return Err(PfoError::NotPositiveSemidefinite {
            eigenvalue: smallest,
            largest,
        });
    }
    Ok(())
}

/// Symmetric PSD square root. Small negative eigenvalues are clamped to zero.
pub fn sqrt_spd(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eig(s)?;
    check_psd(&eig)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Square root and inverse square root of a strictly positive definite matrix.
pub fn sqrt_and_inv_sqrt(c: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = sym_eig(c)?;
    let largest = eig.largest();
    let smallest = eig.smallest();
    if largest <= 0.0 || smallest <= DEFINITE_RATIO * largest {
        let condition = if smallest > 0.0 {
            largest / smallest
        } else {
            f64::INFINITY
        };
        return Err(PfoError::NearSingular { condition });
    }
    Ok((
        eig.reconstruct_with(f64::sqrt),
        eig.reconstruct_with(|l| 1.0 / l.sqrt()),
    ))
}

/// Principal square root of the product `c * b` for SPD `c` and PSD `b`,
/// computed as `c^{1/2} (c^{1/2} b c^{1/2})^{1/2} c^{-1/2}`.
///
/// The result is generally not symmetric, but it is similar to a PSD matrix
/// and squares back to `c * b`.
pub fn sqrt_product(c: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = ensure_square(c)?;
    if b.shape() != (d, d) {
        return Err(PfoError::DimensionMismatch {
            expected: d,
            got: b.nrows(),
        });
    }
    let (c_half, c_inv_half) = sqrt_and_inv_sqrt(c)?;
    let inner = sqrt_spd(&symmetrize(&(&c_half * b * &c_half)))?;
    Ok(c_half * inner * c_inv_half)
}

/// 2-norm condition number from the singular values; infinite when singular.
pub fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return f64::INFINITY;
    }
    if a.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a well-conditioned square matrix.
pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_square(a)?;
    let condition = condition_estimate(a);
    if !(condition < SINGULAR_CONDITION) {
        return Err(PfoError::NearSingular { condition });
    }
    a.clone()
        .try_inverse()
        .ok_or(PfoError::NearSingular { condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    /// SPD matrix with prescribed spectrum in a random orthonormal basis.
    fn spd_from(d: usize, eigen: &[f64], raw: &[f64]) -> DMatrix<f64> {
        let m = DMatrix::from_iterator(d, d, raw.iter().cloned().take(d * d));
        let q = m.qr().q();
        let lam = DMatrix::from_diagonal(&DVector::from_column_slice(eigen));
        symmetrize(&(&q * lam * q.transpose()))
    }

    fn spd_strategy() -> impl Strategy<Value = DMatrix<f64>> {
        prop::sample::select(vec![1usize, 2, 3, 5]).prop_flat_map(|d| {
            (
                prop::collection::vec(-1.0f64..1.0, d * d),
                prop::collection::vec(0.0f64..6.0, d),
            )
                .prop_map(move |(raw, logs)| {
                    // condition number <= 1e6
                    let eigen: Vec<f64> = logs.iter().map(|l| 10f64.powf(l - 3.0)).collect();
                    let raw: Vec<f64> = raw.iter().enumerate().map(|(i, v)| v + if i % (d + 1) == 0 { 2.0 } else { 0.0 }).collect();
                    spd_from(d, &eigen, &raw)
                })
        })
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = sym_eig(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 1.0]);

        let e = sym_eig(&DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]))).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 4.0]);
        assert!((e.eigenvectors[(1, 0)].abs() - 1.0).abs() < 1e-14);
        assert!((e.eigenvectors[(0, 1)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_two_by_two() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = sym_eig(&s).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
        let v = &e.eigenvectors;
        assert!(max_abs(&(v.transpose() * v - DMatrix::identity(2, 2))) < 1e-10);
        assert!(max_abs(&(e.reconstruct_with(|l| l) - &s)) < 1e-10 * 3.0);
    }

    #[test]
    fn eig_rejects_asymmetric() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eig(&s), Err(PfoError::NotSymmetric { .. })));
    }

    #[test]
    fn sqrt_basics() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!(max_abs(&(sqrt_spd(&i).unwrap() - &i)) < 1e-15);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = sqrt_spd(&d).unwrap();
        assert!(max_abs(&(r - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])))) < 1e-14);
    }

    #[test]
    fn sqrt_of_coupled_matrix_matches_eigen_oracle() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        // eigenvectors (1,-1)/sqrt2 and (1,1)/sqrt2 with eigenvalues 1 and 3
        let h = 0.5 * (1.0 + 3f64.sqrt());
        let k = 0.5 * (3f64.sqrt() - 1.0);
        let expected = DMatrix::from_row_slice(2, 2, &[h, k, k, h]);
        let r = sqrt_spd(&s).unwrap();
        assert!(max_abs(&(&r - &expected)) < 1e-14);
        assert!(rel_err(&(&r * &r), &s) < 1e-14);
    }

    #[test]
    fn sqrt_clamps_roundoff_but_rejects_negative() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-13]));
        let r = sqrt_spd(&s).unwrap();
        assert_eq!(r[(1, 1)], 0.0);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-6]));
        assert!(matches!(sqrt_spd(&s), Err(PfoError::NotPositiveSemidefinite { .. })));
    }

    #[test]
    fn sqrt_product_cases() {
        let i = DMatrix::<f64>::identity(2, 2);
        assert!(max_abs(&(sqrt_product(&i, &i).unwrap() - &i)) < 1e-15);
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 1.0]));
        let m = sqrt_product(&c, &b).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![6.0, 1.0]));
        assert!(max_abs(&(m - expected)) < 1e-14);
    }

    #[test]
    fn sqrt_product_random_3d() {
        let c = spd_from(3, &[0.5, 2.0, 7.0], &[0.3, -0.2, 0.9, 0.1, 0.5, -0.7, 0.8, 0.2, 0.4]);
        let b = spd_from(3, &[0.1, 1.0, 3.0], &[-0.6, 0.2, 0.3, 0.9, -0.1, 0.5, 0.2, 0.7, -0.4]);
        let m = sqrt_product(&c, &b).unwrap();
        assert!(rel_err(&(&m * &m), &(&c * &b)) < 1e-8);
    }

    #[test]
    fn sqrt_product_rejects_singular_left_factor() {
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let i = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(sqrt_product(&c, &i), Err(PfoError::NearSingular { .. })));
    }

    #[test]
    fn inverse_and_condition() {
        let i = DMatrix::<f64>::identity(2, 2);
        assert_eq!(inverse(&i).unwrap(), i);
        assert!((condition_estimate(&i) - 1.0).abs() < 1e-15);

        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-13]));
        match inverse(&s) {
            Err(PfoError::NearSingular { condition }) => assert!(condition > 1e12),
            other => panic!("expected near-singular, got {other:?}"),
        }

        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 2.0, -1.0, 1.5]);
        let inv = inverse(&a).unwrap();
        assert!(max_abs(&(&a * inv - &i)) < 1e-8);
    }

    #[test]
    fn condition_estimate_matches_spectral_ratio_for_spd() {
        let s = spd_from(3, &[0.01, 1.0, 50.0], &[0.2, 0.4, -0.3, 0.7, 0.1, 0.6, -0.5, 0.9, 0.3]);
        let c = condition_estimate(&s);
        assert!((c / 5000.0 - 1.0).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(s in spd_strategy()) {
            let r = sqrt_spd(&s).unwrap();
            prop_assert!(rel_err(&(&r * &r), &s) < 1e-9);
            let eig = sym_eig(&s).unwrap();
            let v = &eig.eigenvectors;
            let d = s.nrows();
            prop_assert!(max_abs(&(v.transpose() * v - DMatrix::identity(d, d))) < 1e-10);
            prop_assert!(max_abs(&(eig.reconstruct_with(|l| l) - &s)) <= 1e-10 * (1.0 + max_abs(&s)));
        }

        #[test]
        fn product_root_squares_and_preserves_trace((c, b) in spd_strategy().prop_flat_map(|c| {
            let d = c.nrows();
            (Just(c), (prop::collection::vec(-1.0f64..1.0, d * d), prop::collection::vec(0.0f64..6.0, d))
                .prop_map(move |(raw, logs)| {
                    let eigen: Vec<f64> = logs.iter().map(|l| 10f64.powf(l - 3.0)).collect();
                    let raw: Vec<f64> = raw.iter().enumerate().map(|(i, v)| v + if i % (d + 1) == 0 { 2.0 } else { 0.0 }).collect();
                    spd_from(d, &eigen, &raw)
                }))
        })) {
            let m = sqrt_product(&c, &b).unwrap();
            let cb = &c * &b;
            prop_assert!(rel_err(&(&m * &m), &cb) < 1e-8);
            let c_half = sqrt_spd(&c).unwrap();
            let similar = sqrt_spd(&symmetrize(&(&c_half * &b * &c_half))).unwrap();
            prop_assert!((m.trace() - similar.trace()).abs() <= 1e-9 * (1.0 + similar.trace().abs()));
        }
    }
}
