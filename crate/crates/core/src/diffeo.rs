//! Discretized circle diffeomorphisms and the cross-ratio observable.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::pairwise_sum;

/// A circle diffeomorphism sampled as `ξ = log φ′ − log φ′(0)` on `t = i/n`.
///
/// `φ(t) = θ + ∫₀ᵗ e^ξ / ∫₀¹ e^ξ`. Integrals of `e^ξ` use the trapezoid rule
/// with the Euler–Maclaurin end correction applied cell by cell, i.e. the exact
/// integral of the cubic Hermite interpolant of `e^ξ` with node slopes
/// `e^ξ ξ′`. Off-grid `ξ` is the cubic Hermite interpolant on the same slopes.
/// A cell whose Hermite cubic could dip below zero falls back to the exact
/// integral of `e^ξ` with `ξ` linear on the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiffeoRecord", into = "DiffeoRecord")]
pub struct GridDiffeo {
    n: usize,
    xi: Vec<f64>,
    theta: f64,
    shift: f64,
    f: Vec<f64>,
    slope: Vec<f64>,
    cum: Vec<f64>,
    linear_cell: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct DiffeoRecord {
    n: usize,
    theta: f64,
    xi: Vec<f64>,
}

impl TryFrom<DiffeoRecord> for GridDiffeo {
    type Error = Error;

    fn try_from(r: DiffeoRecord) -> Result<Self> {
        if r.xi.len() != r.n + 1 {
            return Err(invalid(format!("n = {} but xi has {} entries", r.n, r.xi.len())));
        }
        GridDiffeo::new(r.xi, r.theta)
    }
}

impl From<GridDiffeo> for DiffeoRecord {
    fn from(d: GridDiffeo) -> Self {
        DiffeoRecord {
            n: d.n,
            theta: d.theta,
            xi: d.xi,
        }
    }
}

/// Reduces to `[0, 1)`, mapping values that round up to 1 onto 0.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the circle `ℝ/ℤ`, in `[0, 1/2]`.
pub fn circle_dist(s: f64, t: f64) -> f64 {
    let d = wrap_unit(t - s);
    d.min(1.0 - d)
}

/// The P-map: builds the diffeomorphism `θ + 𝖯(ξ)`.
pub fn p_map(xi: &[f64], theta: f64) -> Result<GridDiffeo> {
    GridDiffeo::new(xi.to_vec(), theta)
}

/// Inverse of the P-map on grid representations.
pub fn p_inverse(diffeo: &GridDiffeo) -> Vec<f64> {
    diffeo.xi.clone()
}

/// Recovers a grid diffeomorphism from lifted samples `φ(i/n)`, `i < n`.
///
/// `φ′` comes from fourth-order centred differences, using `φ(t+1) = φ(t) + 1`
/// across the ends.
pub fn p_inverse_sampled(phi: &[f64]) -> Result<GridDiffeo> {
    let n = phi.len();
    if n < 5 {
        return Err(invalid("need at least five samples"));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite sample"));
    }
    let at = |i: isize| -> f64 {
        let ni = n as isize;
        let wraps = i.div_euclid(ni);
        phi[i.rem_euclid(ni) as usize] + wraps as f64
    };
    let h = 1.0 / n as f64;
    let mut log_d = Vec::with_capacity(n + 1);
    for i in 0..n as isize {
        let d = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
        if !(d > 0.0) {
            return Err(invalid(format!("samples are not increasing near index {i}")));
        }
        log_d.push(d.ln());
    }
    log_d.push(log_d[0]);
    let base = log_d[0];
    let xi: Vec<f64> = log_d.iter().map(|v| v - base).collect();
    GridDiffeo::new(xi, wrap_unit(phi[0]))
}

impl GridDiffeo {
    /// Validates `ξ` and `θ` and precomputes the cumulative integrals.
    pub fn new(xi: Vec<f64>, theta: f64) -> Result<Self> {
        if xi.len() < 5 {
            return Err(invalid(format!("need n >= 4, got n = {}", xi.len().saturating_sub(1))));
        }
        if xi[0] != 0.0 {
            return Err(invalid(format!("xi[0] must be exactly 0, got {}", xi[0])));
        }
        if let Some(i) = xi.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("xi[{i}] is not finite")));
        }
        if !(theta.is_finite() && (0.0..1.0).contains(&theta)) {
            return Err(invalid(format!("theta must lie in [0,1), got {theta}")));
        }
        let n = xi.len() - 1;
        let h = 1.0 / n as f64;
        let shift = xi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let f: Vec<f64> = xi.iter().map(|v| (v - shift).exp()).collect();
        let slope = node_slopes(&xi);
        let mut cum = Vec::with_capacity(n + 1);
        let mut linear_cell = Vec::with_capacity(n);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let (da, db) = (f[i] * slope[i], f[i + 1] * slope[i + 1]);
            let positive = h * da >= -3.0 * f[i] && h * db <= 3.0 * f[i + 1];
            let cell = if positive {
                0.5 * h * (f[i] + f[i + 1]) + h * h * (da - db) / 12.0
            } else {
                h * f[i] * exp_ratio(xi[i + 1] - xi[i], 1.0)
            };
            linear_cell.push(!positive);
            acc += cell;
            cum.push(acc);
        }
        Ok(Self {
            n,
            xi,
            theta,
            shift,
            f,
            slope,
            cum,
            linear_cell,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![0.0; n + 1], 0.0).expect("identity is valid for n >= 4")
    }

    pub fn rotation(n: usize, theta: f64) -> Result<Self> {
        Self::new(vec![0.0; n + 1], wrap_unit(theta))
    }

    /// Samples `profile(i/n) − profile(0)` as `ξ`.
    pub fn from_profile(n: usize, theta: f64, profile: impl Fn(f64) -> f64) -> Result<Self> {
        let base = profile(0.0);
        let mut xi: Vec<f64> = (0..=n).map(|i| profile(i as f64 / n as f64) - base).collect();
        xi[0] = 0.0;
        Self::new(xi, theta)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn total(&self) -> f64 {
        self.cum[self.n]
    }

    /// Lifted `φ(i/n)`; `φ(1) = θ + 1` exactly.
    pub fn node_phi(&self, i: usize) -> f64 {
        self.theta + self.cum[i] / self.total()
    }

    pub fn node_log_dphi(&self, i: usize) -> f64 {
        self.xi[i] - self.shift - self.total().ln()
    }

    pub fn node_dphi(&self, i: usize) -> f64 {
        self.f[i] / self.total()
    }

    /// Node slopes of `ξ` used by the Hermite interpolant.
    pub fn slopes(&self) -> &[f64] {
        &self.slope
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let x = t * self.n as f64;
        let i = (x.floor() as usize).min(self.n - 1);
        (i, x - i as f64)
    }

    /// `∫₀ᵗ e^{ξ − shift}` for `t ∈ [0, 1]`.
    fn partial(&self, t: f64) -> f64 {
        let (i, u) = self.locate(t);
        if u == 0.0 {
            return self.cum[i];
        }
        let h = self.h();
        let cell = if self.linear_cell[i] {
            h * self.f[i] * u * exp_ratio(self.xi[i + 1] - self.xi[i], u)
        } else {
            let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
            let i00 = u - u3 + 0.5 * u4;
            let i10 = 0.5 * u2 - 2.0 * u3 / 3.0 + 0.25 * u4;
            let i01 = u3 - 0.5 * u4;
            let i11 = 0.25 * u4 - u3 / 3.0;
            let (da, db) = (self.f[i] * self.slope[i], self.f[i + 1] * self.slope[i + 1]);
            h * (self.f[i] * i00 + h * da * i10 + self.f[i + 1] * i01 + h * db * i11)
        };
        self.cum[i] + cell
    }

    /// `ξ(t)` for `t ∈ [0, 1]` by cubic Hermite interpolation.
    pub fn xi_at(&self, t: f64) -> f64 {
        let (i, u) = self.locate(t);
        if u == 0.0 {
            return self.xi[i];
        }
        let h = self.h();
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.xi[i] + h * h10 * self.slope[i] + h01 * self.xi[i + 1] + h * h11 * self.slope[i + 1]
    }

    /// `𝖯(ξ)(t)` for `t ∈ [0, 1]`.
    pub fn p_value(&self, t: f64) -> f64 {
        self.partial(t) / self.total()
    }

    /// Lift of `φ` to the real line, `φ(t + 1) = φ(t) + 1`.
    pub fn phi_lift(&self, t: f64) -> f64 {
        let k = t.floor();
        self.theta + k + self.p_value(t - k)
    }

    /// `φ(t)` as a circle point in `[0, 1)`.
    pub fn phi(&self, t: f64) -> f64 {
        wrap_unit(self.phi_lift(t))
    }

    pub fn log_dphi(&self, t: f64) -> f64 {
        let r = wrap_unit(t);
        self.xi_at(r) - self.shift - self.total().ln()
    }

    pub fn dphi(&self, t: f64) -> f64 {
        self.log_dphi(t).exp()
    }

    /// `∫φ′²` by the trapezoid rule, written as `1 + Var/mean²` so that the
    /// Jensen bound `∫φ′² ≥ 1` holds exactly.
    pub fn derivative_energy(&self) -> f64 {
        derivative_energy(&self.xi)
    }

    /// Largest `d(φ(i/n), i/n)` over the grid.
    pub fn sup_distance_to_identity(&self) -> f64 {
        (0..self.n)
            .map(|i| circle_dist(self.node_phi(i), i as f64 / self.n as f64))
            .fold(0.0, f64::max)
    }

    /// `𝒪` between grid nodes `i` and `j`, oriented from `i` to `j`.
    pub fn node_cross_ratio(&self, i: usize, j: usize) -> f64 {
        let arc = if j > i {
            self.cum[j] - self.cum[i]
        } else {
            self.total() - (self.cum[i] - self.cum[j])
        };
        let d = arc / self.total();
        let log_d = 0.5 * (self.node_log_dphi(i) + self.node_log_dphi(j));
        PI * log_d.exp() / (PI * d.min(1.0 - d)).sin()
    }
}

/// `(e^{δu} − 1)/(δu)`, equal to 1 at `δ = 0`.
fn exp_ratio(delta: f64, u: f64) -> f64 {
    let x = delta * u;
    if x.abs() < 1e-300 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

fn node_slopes(xi: &[f64]) -> Vec<f64> {
    let n = xi.len() - 1;
    let nf = n as f64;
    let mut s = vec![0.0; n + 1];
    s[0] = nf * (-3.0 * xi[0] + 4.0 * xi[1] - xi[2]) / 2.0;
    s[n] = nf * (3.0 * xi[n] - 4.0 * xi[n - 1] + xi[n - 2]) / 2.0;
    for i in 1..n {
        s[i] = nf * (xi[i + 1] - xi[i - 1]) / 2.0;
    }
    s
}

/// Trapezoid weights `h·w_i` on `n + 1` nodes.
fn trapezoid_weight(i: usize, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    if i == 0 || i == n {
        0.5 * h
    } else {
        h
    }
}

/// Trapezoid mean and variance of `e^{ξ − max ξ}`.
pub(crate) fn exp_moments(xi: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = xi.len() - 1;
    let shift = xi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let f: Vec<f64> = xi.iter().map(|v| (v - shift).exp()).collect();
    let mean_terms: Vec<f64> = f.iter().enumerate().map(|(i, v)| trapezoid_weight(i, n) * v).collect();
    let mean = pairwise_sum(&mean_terms);
    let var_terms: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(i, v)| trapezoid_weight(i, n) * (v - mean) * (v - mean))
        .collect();
    (mean, pairwise_sum(&var_terms), f)
}

/// `∫φ′²` for `φ = 𝖯(ξ)` with trapezoid sums; at least 1 exactly.
pub fn derivative_energy(xi: &[f64]) -> f64 {
    let (mean, var, _) = exp_moments(xi);
    1.0 + var / (mean * mean)
}

/// `½∫ξ′²` of the piecewise-linear interpolant.
pub fn dirichlet_energy(xi: &[f64]) -> f64 {
    let n = (xi.len() - 1) as f64;
    let terms: Vec<f64> = xi.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).collect();
    0.5 * n * pairwise_sum(&terms)
}

/// The cross-ratio observable `𝒪(φ,s,t) = π√(φ′(s)φ′(t)) / sin(π[φ(t) − φ(s)])`.
///
/// `φ(t) − φ(s)` is taken along the positively oriented arc from `s` to `t`.
pub fn cross_ratio(phi: &GridDiffeo, s: f64, t: f64) -> Result<f64> {
    if !s.is_finite() || !t.is_finite() {
        return Err(invalid("circle points must be finite"));
    }
    let (s, t) = (wrap_unit(s), wrap_unit(t));
    if s == t {
        return Err(Error::UndefinedObservable(format!("s = t = {s}")));
    }
    let (cs, ct) = (phi.partial(s), phi.partial(t));
    let arc = if t > s { ct - cs } else { phi.total() - (cs - ct) };
    let d = arc / phi.total();
    let log_d = 0.5 * (phi.log_dphi(s) + phi.log_dphi(t));
    Ok(PI * log_d.exp() / (PI * d.min(1.0 - d)).sin())
}

/// A diffeomorphism with `ξ = Σ_{k≤modes} a_k(cos 2πkt − 1) + b_k sin 2πkt`,
/// coefficients uniform in `[−amplitude, amplitude]/k` and uniform `θ`.
pub fn random_smooth<R: Rng + ?Sized>(rng: &mut R, n: usize, modes: usize, amplitude: f64) -> Result<GridDiffeo> {
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|k| {
            let a = amplitude * rng.random_range(-1.0..1.0) / k as f64;
            let b = amplitude * rng.random_range(-1.0..1.0) / k as f64;
            (a, b)
        })
        .collect();
    let theta: f64 = rng.random();
    GridDiffeo::from_profile(n, theta, |t| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let (s, c) = (2.0 * PI * (k + 1) as f64 * t).sin_cos();
                a * (c - 1.0) + b * s
            })
            .sum()
    })
}

/// Sup norm of the difference of two profiles on the same grid.
pub fn xi_distance(a: &GridDiffeo, b: &GridDiffeo) -> f64 {
    a.xi.iter().zip(&b.xi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_rotation() {
        let id = GridDiffeo::identity(64);
        for i in 0..=64 {
            let t = i as f64 / 64.0;
            assert!((id.node_phi(i) - t).abs() < 1e-15);
            assert!((id.node_dphi(i) - 1.0).abs() < 1e-15);
        }
        let r = GridDiffeo::rotation(64, 0.25).unwrap();
        assert!((r.phi(0.5) - 0.75).abs() < 1e-15);
        assert!((r.phi(0.9) - 0.15).abs() < 1e-14);
        assert_eq!(r.node_phi(64), 1.25);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GridDiffeo::new(vec![0.0, 1.0, f64::NAN, 0.0, 0.0], 0.0).is_err());
        assert!(GridDiffeo::new(vec![0.1, 0.0, 0.0, 0.0, 0.0], 0.0).is_err());
        assert!(GridDiffeo::new(vec![0.0; 5], 1.0).is_err());
        assert!(GridDiffeo::new(vec![0.0; 4], 0.0).is_err());
    }

    #[test]
    fn off_grid_phi_is_fourth_order() {
        let profile = |t: f64| 0.3 * (2.0 * PI * t).sin();
        let exact = |t: f64| {
            let rule = crate::quadrature::GaussLegendre::new(40);
            let int = |a: f64, b: f64| -> f64 {
                rule.composite(a, b, 8).iter().map(|(x, w)| w * profile(*x).exp()).sum()
            };
            int(0.0, t) / int(0.0, 1.0)
        };
        let mut errs = Vec::new();
        for n in [64, 128] {
            let d = GridDiffeo::from_profile(n, 0.0, profile).unwrap();
            let e = (d.p_value(0.3711) - exact(0.3711)).abs();
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 12.0, "{errs:?}");
    }

    #[test]
    fn circle_distance_examples() {
        assert!((circle_dist(0.1, 0.9) - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(0.3, 0.3), 0.0);
        assert_eq!(circle_dist(0.0, 0.5), 0.5);
    }

    #[test]
    fn cross_ratio_identity_and_undefined() {
        let id = GridDiffeo::identity(32);
        let v = cross_ratio(&id, 0.1, 0.45).unwrap();
        assert!((v - PI / (0.35 * PI).sin()).abs() < 1e-13);
        let wrapped = cross_ratio(&id, 0.8, 0.1).unwrap();
        assert!((wrapped - PI / (0.3 * PI).sin()).abs() < 1e-13);
        assert!(matches!(cross_ratio(&id, 0.2, 0.2), Err(Error::UndefinedObservable(_))));
        assert!(matches!(cross_ratio(&id, 0.0, 1.0), Err(Error::UndefinedObservable(_))));
    }

    #[test]
    fn node_cross_ratio_matches_general() {
        let d = GridDiffeo::from_profile(128, 0.3, |t| 0.2 * (2.0 * PI * t).cos() - 0.1 * (4.0 * PI * t).sin()).unwrap();
        for (i, j) in [(3, 70), (100, 5), (0, 64)] {
            let a = d.node_cross_ratio(i, j);
            let b = cross_ratio(&d, i as f64 / 128.0, j as f64 / 128.0).unwrap();
            assert!((a / b - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let d = GridDiffeo::from_profile(16, 0.123, |t| (3.0 * t).sin() * 0.7).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: GridDiffeo = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let bad = r#"{"n":5,"theta":0.0,"xi":[0.0,0.0]}"#;
        assert!(serde_json::from_str::<GridDiffeo>(bad).is_err());
    }

    #[test]
    fn wrap_unit_never_returns_one() {
        assert_eq!(wrap_unit(-1e-18), 0.0);
        assert_eq!(wrap_unit(1.0), 0.0);
        assert!((wrap_unit(-0.25) - 0.75).abs() < 1e-16);
    }
}
