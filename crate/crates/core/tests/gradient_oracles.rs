use pfo_core::{
    empirical_cost, empirical_gradient, gaussian_cost, gaussian_gradient, linalg::condition_estimate, solve_discrete_ot,
    BasisFamily, BasisModel, DMatrix, DVector, EmpiricalMeasure,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Richardson-extrapolated central difference.
fn derivative(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let central = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * central(h / 2.0) - central(h)) / 3.0
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}

fn random_spd(rng: &mut ChaCha8Rng, d: usize, max_condition: f64) -> DMatrix<f64> {
    let q = random_orthogonal(rng, d);
    let top: f64 = rng.random_range(0.5..10.0);
    let eig = DVector::from_iterator(d, (0..d).map(|_| top * max_condition.powf(-rng.random_range(0.0..1.0))));
    let s = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (&s + s.transpose()) * 0.5
}

#[test]
fn gaussian_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let d = 1 + trial % 3;
        let m = 2 + trial % 5;
        let covs: Vec<_> = (0..m).map(|_| random_spd(&mut rng, d, 1e4)).collect();
        let a = loop {
            let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.5..1.5));
            if condition_estimate(&a) < 50.0 {
                break a;
            }
        };
        let grad = gaussian_gradient(&a, &covs).unwrap();
        let scale = grad.amax();
        for idx in 0..d * d {
            let h = 1e-4 * a[idx].abs().max(0.1);
            let fd = derivative(
                |t| {
                    let mut b = a.clone();
                    b[idx] += t;
                    gaussian_cost(&b, &covs).unwrap()
                },
                h,
            );
            let err = (fd - grad[idx]).abs() / grad[idx].abs().max(1e-3 * scale);
            worst = worst.max(err);
        }
    }
    assert!(worst <= 1e-5, "max relative error {worst}");
}

fn cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: f64) -> EmpiricalMeasure {
    EmpiricalMeasure::uniform(
        (0..n)
            .map(|_| DVector::from_iterator(d, (0..d).map(|_| shift + rng.random_range(-1.0..1.0))))
            .collect(),
    )
    .unwrap()
}

fn plans(model: &BasisModel, snaps: &[EmpiricalMeasure]) -> Vec<Vec<(usize, usize, f64)>> {
    snaps
        .windows(2)
        .map(|w| {
            let pushed = EmpiricalMeasure::new(w[0].points().iter().map(|x| model.eval(x)).collect(), w[0].weights().to_vec())
                .unwrap();
            solve_discrete_ot(&pushed, &w[1]).unwrap().entries().to_vec()
        })
        .collect()
}

#[test]
fn empirical_gradient_matches_finite_differences_at_plan_stable_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut checked = 0;
    let mut worst = 0.0f64;
    while checked < 20 {
        let d = 1 + checked % 2;
        let n = rng.random_range(5..=30);
        let snaps: Vec<_> = (0..3).map(|k| cloud(&mut rng, n, d, 0.3 * k as f64)).collect();
        let family = if checked % 4 == 3 {
            BasisFamily::Affine { dim: d }
        } else if d == 1 && checked % 4 == 1 {
            BasisFamily::cubic()
        } else {
            BasisFamily::Linear { dim: d }
        };
        let theta = DVector::from_iterator(family.n_params(), (0..family.n_params()).map(|_| rng.random_range(-1.0..1.0)));
        let model = BasisModel::new(family, theta.clone()).unwrap();
        let h = 1e-6;
        let base = plans(&model, &snaps);
        let stable = (0..theta.len()).all(|k| {
            [-h, h].iter().all(|&s| {
                let mut t = theta.clone();
                t[k] += s;
                plans(&model.with_theta(t).unwrap(), &snaps) == base
            })
        });
        if !stable {
            continue;
        }
        let grad = empirical_gradient(&model, &snaps).unwrap();
        let scale = grad.amax();
        for k in 0..theta.len() {
            let fd = derivative(
                |s| {
                    let mut t = theta.clone();
                    t[k] += s;
                    empirical_cost(&model.with_theta(t).unwrap(), &snaps).unwrap()
                },
                h,
            );
            worst = worst.max((fd - grad[k]).abs() / grad[k].abs().max(1e-3 * scale));
        }
        checked += 1;
    }
    assert!(worst <= 1e-4, "max relative error {worst}");
}
