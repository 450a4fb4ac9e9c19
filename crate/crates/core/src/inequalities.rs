//! Elementary inequalities used by the regularity and kernel estimates,
//! checked pointwise on explicit grids.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::mobius::{three_point_map, MobiusMap};
use crate::rng::{stream_id, stream_rng};
use crate::specfun::arccosh_sq;

/// Constant used for the lower Taylor bound on `arccosh²(cosh x + y)`.
pub const ARCCOSH_CONSTANT: f64 = 10.0;
/// Constant recorded for the near-identity Möbius derivative bounds.
pub const MOBIUS_CONSTANT: f64 = 40.0;

const ROUNDING: f64 = 1e-12;

/// Outcome of one inequality on its grid.
///
/// `required` is the smallest constant that the grid itself forces; the
/// inequality holds on the grid iff `violations == 0`, which for the
/// constant-carrying forms means `required ≤ constant`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub constant: f64,
    pub required: f64,
    pub points: usize,
    pub violations: usize,
}

impl InequalityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.points > 0
    }

    fn collect(name: &str, constant: f64, samples: impl ParallelIterator<Item = Option<(f64, bool)>>) -> Self {
        let rows: Vec<Option<(f64, bool)>> = samples.collect();
        let mut required = 0.0f64;
        let mut points = 0;
        let mut violations = 0;
        for (ratio, ok) in rows.into_iter().flatten() {
            points += 1;
            required = required.max(ratio);
            if !ok {
                violations += 1;
            }
        }
        Self {
            name: name.to_string(),
            constant,
            required,
            points,
            violations,
        }
    }
}

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + ROUNDING * (1.0 + rhs.abs())
}

/// `|log sin x − log sin(x+y)| ≤ 1000|y|/x` for `x ∈ (0, π/2)`, `|y| < x/2`.
///
/// `x` runs over a uniform grid and a log-spaced grid down to `1e-8`.
pub fn log_sin_increment(grid: usize) -> InequalityReport {
    let mut xs: Vec<f64> = (1..grid).map(|i| 0.5 * PI * i as f64 / grid as f64).collect();
    xs.extend((0..grid).map(|i| 1e-8 * (1e7f64).powf(i as f64 / grid as f64)));
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| (1..grid).map(move |j| (x, x * (j as f64 / grid as f64 - 0.5))))
        .collect();
    InequalityReport::collect(
        "log-sin-increment",
        1000.0,
        pts.into_par_iter().map(|(x, y)| {
            if y == 0.0 {
                return None;
            }
            let lhs = (x.sin().ln() - (x + y).sin().ln()).abs();
            let scale = y.abs() / x;
            Some((lhs / scale, !exceeds(lhs, 1000.0 * scale)))
        }),
    )
}

/// `arccosh²(cosh x + y) ≥ x² + 2y − C|y|(x² + |y|)` for `x ∈ [0, 5]`, `|y| ≤ 1/2`.
pub fn arccosh_square_lower(constant: f64, grid: usize) -> Result<InequalityReport> {
    let pts: Vec<(f64, f64)> = (0..=grid)
        .flat_map(|i| (0..=grid).map(move |j| (5.0 * i as f64 / grid as f64, j as f64 / grid as f64 - 0.5)))
        .collect();
    let values: Vec<Result<Option<(f64, bool)>>> = pts
        .into_par_iter()
        .map(|(x, y)| {
            let a = arccosh_sq(x.cosh() + y)?;
            let defect = x * x + 2.0 * y - a;
            let weight = y.abs() * (x * x + y.abs());
            if weight == 0.0 {
                return Ok(Some((0.0, !exceeds(defect, 0.0))));
            }
            Ok(Some((defect / weight, !exceeds(defect, constant * weight))))
        })
        .collect();
    let rows = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::collect("arccosh-square-lower", constant, rows.into_par_iter()))
}

/// `δ` with `cosh(x + δ) = cosh x + y`, from `2 sinh(x + δ/2) sinh(δ/2) = y`.
fn arccosh_increment(x: f64, y: f64) -> f64 {
    let mut delta = y / x.sinh();
    for _ in 0..50 {
        let next = 2.0 * (0.5 * y / (x + 0.5 * delta).sinh()).asinh();
        if (next - delta).abs() <= 1e-17 * delta.abs() {
            return next;
        }
        delta = next;
    }
    delta
}

/// `|arccosh²(cosh x + y) − x²| ≤ C|y|e^{−x/2}` for `x ∈ [10, 60]`, `|y| ≤ 1/2`.
///
/// The difference is evaluated as `δ(2x + δ)` to avoid cancelling against `x²`.
pub fn arccosh_square_tail(constant: f64, grid: usize) -> InequalityReport {
    let pts: Vec<(f64, f64)> = (0..=grid)
        .flat_map(|i| (0..=grid).map(move |j| (10.0 + 50.0 * i as f64 / grid as f64, j as f64 / grid as f64 - 0.5)))
        .collect();
    InequalityReport::collect(
        "arccosh-square-tail",
        constant,
        pts.into_par_iter().map(move |(x, y)| {
            if y == 0.0 {
                return None;
            }
            let delta = arccosh_increment(x, y);
            let lhs = (delta * (2.0 * x + delta)).abs();
            let scale = y.abs() * (-0.5 * x).exp();
            Some((lhs / scale, !exceeds(lhs, constant * scale)))
        }),
    )
}

/// `|sin(xt)/x − sin t| ≤ |x² − 1||t|³/6` for `x ∈ (0, 5]`, `t ∈ [−10, 10]`.
pub fn sine_rescaling(grid: usize) -> InequalityReport {
    let pts: Vec<(f64, f64)> = (1..=grid)
        .flat_map(|i| (0..=2 * grid).map(move |j| (5.0 * i as f64 / grid as f64, 10.0 * (j as f64 / grid as f64 - 1.0))))
        .collect();
    InequalityReport::collect(
        "sine-rescaling",
        1.0 / 6.0,
        pts.into_par_iter().map(|(x, t)| {
            let scale = (x * x - 1.0).abs() * t.abs().powi(3);
            if scale == 0.0 {
                return None;
            }
            let lhs = ((x * t).sin() / x - t.sin()).abs();
            Some((lhs / scale, !exceeds(lhs, scale / 6.0)))
        }),
    )
}

/// Largest of the three consecutive-arc displacements `|φ(b) − φ(a) − 1/3|`.
pub fn third_displacement(m: &MobiusMap) -> f64 {
    let p = [m.apply(0.0), m.apply(1.0 / 3.0), m.apply(2.0 / 3.0), m.apply(0.0) + 1.0];
    (0..3).map(|k| (p[k + 1] - p[k] - 1.0 / 3.0).abs()).fold(0.0, f64::max)
}

/// Suprema of `|φ′ − 1|` and `|φ″|` over `points` circle nodes, `φ″` from
/// central differences of the closed-form `φ′`.
pub fn derivative_deviation(m: &MobiusMap, points: usize) -> (f64, f64) {
    let step = 1e-5;
    (0..points).fold((0.0f64, 0.0f64), |(d1, d2), i| {
        let t = i as f64 / points as f64;
        let second = (m.derivative(t + step) - m.derivative(t - step)) / (2.0 * step);
        (d1.max((m.derivative(t) - 1.0).abs()), d2.max(second.abs()))
    })
}

/// Random Möbius maps with all three displacements below `eps`; each must
/// satisfy `|φ′ − 1| < Cε` and `|φ″| < Cε` on the circle.
pub fn mobius_near_identity(eps: f64, constant: f64, samples: usize, seed: u64) -> Result<InequalityReport> {
    let maps: Vec<Result<MobiusMap>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, stream_id(7, i));
            loop {
                let base: f64 = rng.random();
                let e1 = eps * rng.random_range(-1.0..1.0);
                let e2 = eps * rng.random_range(-1.0..1.0);
                if (e1 + e2).abs() >= eps {
                    continue;
                }
                let to = [base, base + 1.0 / 3.0 + e1, base + 2.0 / 3.0 + e1 + e2];
                return three_point_map([0.0, 1.0 / 3.0, 2.0 / 3.0], to);
            }
        })
        .collect();
    let maps = maps.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::collect(
        "mobius-near-identity",
        constant,
        maps.into_par_iter().map(move |m| {
            let (d1, d2) = derivative_deviation(&m, 512);
            let worst = d1.max(d2);
            Some((worst / eps, worst < constant * eps && third_displacement(&m) < eps))
        }),
    ))
}

/// Every grid check at its default resolution.
pub fn appendix_suite(seed: u64) -> Result<Vec<InequalityReport>> {
    let mut out = vec![
        log_sin_increment(400),
        arccosh_square_lower(ARCCOSH_CONSTANT, 400)?,
        arccosh_square_tail(1.0, 400),
        sine_rescaling(400),
    ];
    for eps in [0.01, 0.05, 0.1] {
        let mut r = mobius_near_identity(eps, MOBIUS_CONSTANT, 2000, seed)?;
        r.name = format!("mobius-near-identity eps={eps}");
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increment_matches_direct_arccosh() {
        for &(x, y) in &[(10.0, 0.3), (12.0, -0.5), (15.0, 0.01)] {
            let delta = arccosh_increment(x, y);
            let direct: f64 = ((x as f64).cosh() + y).acosh() - x;
            assert!((delta - direct).abs() < 1e-12, "{x} {y}");
        }
    }

    #[test]
    fn central_difference_matches_closed_form() {
        let m = MobiusMap::from_cartan(0.1, 0.05, 0.3);
        for i in 0..32 {
            let t = i as f64 / 32.0;
            let fd = (m.derivative(t + 1e-5) - m.derivative(t - 1e-5)) / 2e-5;
            assert!((fd - m.second_derivative(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn suite_holds() {
        for r in appendix_suite(0).unwrap() {
            assert!(r.holds(), "{r:?}");
        }
    }
}
