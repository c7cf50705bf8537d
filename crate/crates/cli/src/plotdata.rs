//! Plot-ready samples of fitted models.

use std::f64::consts::PI;

use pfo_core::{linalg::sqrt_spd, BasisModel, DVector, EmpiricalMeasure, GaussianMeasure, Result};

pub const ELLIPSE_POINTS: usize = 128;
pub const ELLIPSE_LEVELS: [f64; 2] = [1.0, 2.0];
pub const CURVE_POINTS: usize = 200;
pub const HISTOGRAM_BINS: usize = 50;

/// Points of the level-`level` contour `{x : (x-m)^T C^{-1} (x-m) = level^2}`
/// of a two-dimensional Gaussian, as an open polyline.
pub fn ellipse(g: &GaussianMeasure, level: f64) -> Result<Vec<[f64; 2]>> {
    let root = sqrt_spd(g.cov())?;
    let m = g.mean();
    Ok((0..ELLIPSE_POINTS)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / ELLIPSE_POINTS as f64;
            let p = m + &root * DVector::from_vec(vec![t.cos(), t.sin()]) * level;
            [p[0], p[1]]
        })
        .collect())
}

/// `S(x; theta)` on `CURVE_POINTS` equispaced points of `[0, 1]`, endpoints included.
pub fn map_curve(model: &BasisModel) -> Vec<(f64, f64)> {
    (0..CURVE_POINTS)
        .map(|k| {
            let x = k as f64 / (CURVE_POINTS - 1) as f64;
            (x, model.eval(&DVector::from_element(1, x))[0])
        })
        .collect()
}

/// Shared bin edges spanning every sample of the given one-dimensional measures.
pub fn bin_range<'a>(measures: impl IntoIterator<Item = &'a EmpiricalMeasure>) -> (f64, f64) {
    let (lo, hi) = measures
        .into_iter()
        .flat_map(|m| m.points().iter().map(|p| p[0]))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Weighted density histogram with `HISTOGRAM_BINS` bins on `[lo, hi]`; the
/// last bin is closed on the right.
pub fn histogram(m: &EmpiricalMeasure, lo: f64, hi: f64) -> Vec<f64> {
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut mass = vec![0.0; HISTOGRAM_BINS];
    for (p, &w) in m.points().iter().zip(m.weights()) {
        let x = p[0];
        if x < lo || x > hi {
            continue;
        }
        let bin = (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        mass[bin] += w;
    }
    mass.into_iter().map(|w| w / width).collect()
}
