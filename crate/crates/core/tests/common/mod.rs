#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use schwarzian::action::BoundaryConstraints;

/// Feasible constraints whose `κ` is drawn from the regime `which`:
/// 0 hyperbolic (`κ < 1`), 1 linear (`κ = 1`), 2 trigonometric (`κ > 1`).
pub fn random_constraints<R: Rng + ?Sized>(rng: &mut R, which: usize) -> BoundaryConstraints {
    let t1 = rng.random_range(0.0..0.3);
    let dt = rng.random_range(0.2..0.6);
    let p1 = rng.random_range(0.0..0.3);
    let dp = rng.random_range(0.2..0.6);
    let kappa = match which {
        0 => rng.random_range(0.3..0.9),
        1 => 1.0,
        _ => rng.random_range(1.1..4.0),
    };
    let q1 = rng.random_range(0.5..2.0);
    let root = kappa * (PI * dp).sin() / (PI * dt);
    let q2 = root * root / q1;
    BoundaryConstraints::new(t1, t1 + dt, p1, p1 + dp, q1, q2).expect("feasible by construction")
}

/// Asymptotic two-sample Kolmogorov–Smirnov p-value.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let en = (a.len() as f64 * b.len() as f64 / (a.len() + b.len()) as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    if lambda < 0.3 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Sample mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
