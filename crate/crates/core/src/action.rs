//! The Schwarzian action, its gradient, and constrained minimizers on an arc.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diffeo::{derivative_energy, dirichlet_energy, exp_moments, GridDiffeo};
use crate::error::{invalid, Error, Result};
use crate::mobius::MobiusMap;
use crate::quadrature::pairwise_sum;

/// `𝓘(φ) = ½∫ξ′² − 2π²∫φ′²` with forward differences and the trapezoid rule.
pub fn action_value(diffeo: &GridDiffeo) -> f64 {
    profile_action(diffeo.xi())
}

/// [`action_value`] on a raw profile `ξ` with `ξ[0] = 0`.
pub fn profile_action(xi: &[f64]) -> f64 {
    dirichlet_energy(xi) - 2.0 * PI * PI * derivative_energy(xi)
}

/// Partial derivatives of [`action_value`] with respect to `ξ[1..=n]`.
pub fn action_gradient(diffeo: &GridDiffeo) -> Vec<f64> {
    profile_gradient(diffeo.xi())
}

/// Gradient of [`profile_action`] in `ξ[1..=n]`.
pub fn profile_gradient(xi: &[f64]) -> Vec<f64> {
    let n = xi.len() - 1;
    let nf = n as f64;
    let h = 1.0 / nf;
    let (mean, _, f) = exp_moments(xi);
    let sq_terms: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == n { 0.5 * h * v * v } else { h * v * v })
        .collect();
    let second = pairwise_sum(&sq_terms);
    let ratio = second / mean;
    (1..=n)
        .map(|j| {
            let dirichlet = if j < n {
                nf * ((xi[j] - xi[j - 1]) - (xi[j + 1] - xi[j]))
            } else {
                nf * (xi[n] - xi[n - 1])
            };
            let w = if j == n { 0.5 * h } else { h };
            let energy = 2.0 * w * f[j] * (f[j] - ratio) / (mean * mean);
            dirichlet - 2.0 * PI * PI * energy
        })
        .collect()
}

/// Which closed form the constrained minimizer takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "SIN")]
    Sin,
    #[serde(rename = "LINEAR")]
    Linear,
    #[serde(rename = "SINH")]
    Sinh,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Sin => "SIN",
            Regime::Linear => "LINEAR",
            Regime::Sinh => "SINH",
        })
    }
}

/// Half-width of the window around `κ = 1` treated as the linear regime.
pub const KAPPA_TOL: f64 = 1e-9;

/// Values and derivatives prescribed at the ends of `[t₁, t₂]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConstraints {
    pub t1: f64,
    pub t2: f64,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl BoundaryConstraints {
    pub fn new(t1: f64, t2: f64, p1: f64, p2: f64, q1: f64, q2: f64) -> Result<Self> {
        let c = Self {
            t1,
            t2,
            p1,
            p2,
            q1,
            q2,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t1, self.t2, self.p1, self.p2, self.q1, self.q2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("constraints must be finite"));
        }
        let dt = self.t2 - self.t1;
        let dp = self.p2 - self.p1;
        if !(dt > 0.0 && dt < 1.0) {
            return Err(invalid(format!("t2 - t1 must lie in (0,1), got {dt}")));
        }
        if !(dp > 0.0 && dp < 1.0) {
            return Err(invalid(format!("p2 - p1 must lie in (0,1), got {dp}")));
        }
        if !(self.q1 > 0.0 && self.q2 > 0.0) {
            return Err(invalid("derivative constraints must be positive"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t2 - self.t1
    }

    pub fn dp(&self) -> f64 {
        self.p2 - self.p1
    }
}

/// `κ = π√(q₁q₂)(t₂−t₁) / sin(π(p₂−p₁))`.
pub fn kappa_of(c: &BoundaryConstraints) -> f64 {
    PI * (c.q1 * c.q2).sqrt() * c.dt() / (PI * c.dp()).sin()
}

/// Solves `λ·dt/sin(λ·dt) = κ` or `λ·dt/sinh(λ·dt) = κ` for `λ`.
pub fn solve_lambda(kappa: f64, dt: f64) -> Result<(Regime, f64)> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    if !(dt > 0.0 && dt < 1.0) {
        return Err(invalid(format!("dt must lie in (0,1), got {dt}")));
    }
    if (kappa - 1.0).abs() <= KAPPA_TOL {
        return Ok((Regime::Linear, 0.0));
    }
    if kappa > 1.0 {
        let g = |x: f64| x / x.sin() - kappa;
        let x = bisect(g, 0.0, PI);
        let x = polish(x, g, |x| (x.sin() - x * x.cos()) / (x.sin() * x.sin()), 0.0, PI);
        Ok((Regime::Sin, x / dt))
    } else {
        let g = |x: f64| x / x.sinh() - kappa;
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        let x = bisect(g, 0.0, hi);
        let x = polish(x, g, |x| (x.sinh() - x * x.cosh()) / (x.sinh() * x.sinh()), 0.0, hi);
        Ok((Regime::Sinh, x / dt))
    }
}

/// Bisection for a monotone `g` with a sign change on `(lo, hi)`; `g(lo)`
/// is never evaluated.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let increasing = g(hi) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn polish(mut x: f64, g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..3 {
        let d = dg(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - g(x) / d;
        if !(next > lo && next < hi) || g(next).abs() >= g(x).abs() {
            break;
        }
        x = next;
    }
    x
}

/// Regime, frequency and Möbius coefficients of a constrained minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerSolution {
    pub regime: Regime,
    pub lambda: f64,
    pub mobius: MobiusMap,
    pub kappa: f64,
}

/// A map `ψ` sampled on `n + 1` uniform nodes of `[t₁, t₂]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentProfile {
    pub t1: f64,
    pub t2: f64,
    pub psi: Vec<f64>,
    pub log_dpsi: Vec<f64>,
}

impl SegmentProfile {
    pub fn n(&self) -> usize {
        self.psi.len() - 1
    }

    pub fn h(&self) -> f64 {
        (self.t2 - self.t1) / self.n() as f64
    }

    pub fn tau(&self, i: usize) -> f64 {
        self.t1 + i as f64 * self.h()
    }

    /// `½∫(log ψ′)′² − 2π²∫ψ′²` over the segment.
    pub fn action(&self) -> f64 {
        let h = self.h();
        let n = self.n();
        let slope: Vec<f64> = self.log_dpsi.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
        let sq: Vec<f64> = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * (2.0 * self.log_dpsi[i]).exp()
            })
            .collect();
        0.5 * pairwise_sum(&slope) / h - 2.0 * PI * PI * h * pairwise_sum(&sq)
    }

    /// `g = log f′` for `f = −cot(π(ψ − p))`, with `p` placed opposite the
    /// image arc so that `ψ − p` stays inside `(0, 1)`.
    pub fn reduced_log_derivative(&self, c: &BoundaryConstraints) -> Vec<f64> {
        let p = opposite_point(c);
        self.psi
            .iter()
            .zip(&self.log_dpsi)
            .map(|(psi, ld)| PI.ln() + ld - 2.0 * (PI * (psi - p)).sin().abs().ln())
            .collect()
    }

    /// Sup norm of the difference in `log ψ′`.
    pub fn log_derivative_distance(&self, other: &SegmentProfile) -> f64 {
        self.log_dpsi
            .iter()
            .zip(&other.log_dpsi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn opposite_point(c: &BoundaryConstraints) -> f64 {
    c.p1 - 0.5 * (1.0 - c.dp())
}

fn source(regime: Regime, lambda: f64, s: f64) -> [f64; 2] {
    match regime {
        Regime::Sin => [(lambda * s).sin(), (lambda * s).cos()],
        Regime::Sinh => [(lambda * s).sinh(), (lambda * s).cosh()],
        Regime::Linear => [s, 1.0],
    }
}

fn angle_between(w0: [f64; 2], w: [f64; 2]) -> f64 {
    let mut a = (w0[1] * w[0] - w0[0] * w[1]).atan2(w0[1] * w[1] + w0[0] * w[0]);
    if a < -0.5 * PI {
        a += 2.0 * PI;
    }
    a
}

/// The constrained minimizer in closed form, sampled on `n` cells.
///
/// With `s = τ − t₁` the minimizer is `tan(πψ) = (a·T(s) + b)/(c·T(s) + d)`
/// where `T` is `tan(λs)`, `s` or `tanh(λs)` by regime. The matrix sends
/// `(sin, cos)`-type source vectors at both ends to the image points with the
/// lengths fixed by `ψ′(t₁) = q₁`; unit determinant then fixes the length at
/// `t₂`, and `ψ′(t₂) = q₂` holds iff `κ` solves the regime equation. That last
/// condition is asserted, not imposed.
pub fn minimizer_closed_form(c: &BoundaryConstraints, n: usize) -> Result<(MinimizerSolution, SegmentProfile)> {
    c.validate()?;
    if n < 2 {
        return Err(invalid("segment needs at least two cells"));
    }
    let kappa = kappa_of(c);
    let (regime, lambda) = solve_lambda(kappa, c.dt())?;
    let scale = if regime == Regime::Linear { 1.0 } else { lambda };
    let u1 = source(regime, lambda, 0.0);
    let u2 = source(regime, lambda, c.dt());
    let v1 = [(PI * c.p1).sin(), (PI * c.p1).cos()];
    let v2 = [(PI * c.p2).sin(), (PI * c.p2).cos()];
    let det_u = u1[0] * u2[1] - u1[1] * u2[0];
    let det_v = v1[0] * v2[1] - v1[1] * v2[0];
    let r1 = (scale / (PI * c.q1)).sqrt();
    let r2 = det_u / (det_v * r1);
    let expected = scale / (PI * c.q2);
    if ((r2 * r2) / expected - 1.0).abs() > 1e-6 {
        return Err(Error::Inconsistent(format!(
            "derivative at t2 off by factor {}",
            (r2 * r2) / expected
        )));
    }
    // M = [r1 v1, r2 v2] · [u1 u2]^{-1}
    let cols = [[r1 * v1[0], r2 * v2[0]], [r1 * v1[1], r2 * v2[1]]];
    let inv = [[u2[1] / det_u, -u2[0] / det_u], [-u1[1] / det_u, u1[0] / det_u]];
    let m = |i: usize, j: usize| cols[i][0] * inv[0][j] + cols[i][1] * inv[1][j];
    let mobius = MobiusMap::new(m(0, 0), m(0, 1), m(1, 0), m(1, 1))?;
    let [a, b, cc, d] = mobius.coefficients();
    let apply = |s: f64| {
        let u = source(regime, lambda, s);
        [a * u[0] + b * u[1], cc * u[0] + d * u[1]]
    };
    let w0 = apply(0.0);
    let h = c.dt() / n as f64;
    let mut psi = Vec::with_capacity(n + 1);
    let mut log_dpsi = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = if i == n { c.dt() } else { i as f64 * h };
        let w = apply(s);
        psi.push(c.p1 + angle_between(w0, w) / PI);
        log_dpsi.push((scale / PI).ln() - (w[0] * w[0] + w[1] * w[1]).ln());
    }
    Ok((
        MinimizerSolution {
            regime,
            lambda,
            mobius,
            kappa,
        },
        SegmentProfile {
            t1: c.t1,
            t2: c.t2,
            psi,
            log_dpsi,
        },
    ))
}

/// Least-squares `λ₀` in `g″ + λ₀e^g = 0` and the relative residual.
///
/// `g″` uses the fourth-order central stencil at nodes `2..n−2` of the uniform
/// grid on `[t₁, t₂]`; the residual is `‖g″ + λ₀e^g‖₂ / ‖e^g‖₂`.
pub fn euler_lagrange_residual(g: &[f64], t1: f64, t2: f64) -> Result<(f64, f64)> {
    if g.len() < 65 {
        return Err(invalid("need at least 64 cells"));
    }
    if !(t2 > t1) {
        return Err(invalid("t2 must exceed t1"));
    }
    let n = g.len() - 1;
    let h = (t2 - t1) / n as f64;
    let second: Vec<f64> = g
        .windows(5)
        .map(|w| (16.0 * ((w[1] - w[2]) + (w[3] - w[2])) - ((w[0] - w[2]) + (w[4] - w[2]))) / (12.0 * h * h))
        .collect();
    let eg: Vec<f64> = g[2..n - 1].iter().map(|v| v.exp()).collect();
    let num = pairwise_sum(&second.iter().zip(&eg).map(|(s, e)| s * e).collect::<Vec<_>>());
    let den = pairwise_sum(&eg.iter().map(|e| e * e).collect::<Vec<_>>());
    let lambda0 = -num / den;
    let res = pairwise_sum(
        &second
            .iter()
            .zip(&eg)
            .map(|(s, e)| (s + lambda0 * e).powi(2))
            .collect::<Vec<_>>(),
    );
    Ok((lambda0, (res / den).sqrt()))
}

/// Result of the iterative constrained minimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericalMinimizer {
    pub profile: SegmentProfile,
    /// Segment action after each accepted step, starting at the initial point.
    pub action_history: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

struct Reduced {
    h: f64,
    ga: f64,
    gb: f64,
    target: f64,
}

impl Reduced {
    fn energy(&self, g: &[f64]) -> f64 {
        let mut terms = Vec::with_capacity(g.len() + 1);
        let mut prev = self.ga;
        for &v in g.iter().chain(std::iter::once(&self.gb)) {
            terms.push((v - prev) * (v - prev));
            prev = v;
        }
        0.5 * pairwise_sum(&terms) / self.h
    }

    fn constraint(&self, g: &[f64]) -> f64 {
        let mut terms: Vec<f64> = g.iter().map(|v| v.exp()).collect();
        terms.push(0.5 * self.ga.exp());
        terms.push(0.5 * self.gb.exp());
        self.h * pairwise_sum(&terms) - self.target
    }

    fn energy_gradient(&self, g: &[f64]) -> Vec<f64> {
        let m = g.len();
        (0..m)
            .map(|i| {
                let left = if i == 0 { self.ga } else { g[i - 1] };
                let right = if i + 1 == m { self.gb } else { g[i + 1] };
                (2.0 * g[i] - left - right) / self.h
            })
            .collect()
    }

    /// Solves `A x = r` for `A = tridiag(−1, 2, −1)/h`.
    fn solve_laplacian(&self, r: &[f64]) -> Vec<f64> {
        let m = r.len();
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let diag = 2.0 / self.h;
        let off = -1.0 / self.h;
        c[0] = off / diag;
        d[0] = r[0] / diag;
        for i in 1..m {
            let denom = diag - off * c[i - 1];
            c[i] = off / denom;
            d[i] = (r[i] - off * d[i - 1]) / denom;
        }
        let mut x = vec![0.0; m];
        x[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    /// Finds `s` with `constraint(g + s·v) = 0`; `v > 0` makes it monotone.
    fn restore(&self, g: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let at = |s: f64| -> Vec<f64> { g.iter().zip(v).map(|(x, y)| x + s * y).collect() };
        let mut s = 0.0;
        for _ in 0..100 {
            let trial = at(s);
            let c = self.constraint(&trial);
            if c.abs() <= 1e-15 * self.target {
                return Some(trial);
            }
            let dc = self.h * pairwise_sum(&trial.iter().zip(v).map(|(x, y)| y * x.exp()).collect::<Vec<_>>());
            let mut step = c / dc;
            while !at(s - step).iter().all(|x| x.is_finite()) {
                step *= 0.5;
            }
            s -= step;
        }
        let trial = at(s);
        (self.constraint(&trial).abs() <= 1e-12 * self.target).then_some(trial)
    }
}

/// Minimizes `½∫g′²` with `g(t₁), g(t₂)` and `∫e^g` fixed, then rebuilds `ψ`.
///
/// Here `g = log f′`, `f = −cot(π(ψ − p))`, and the segment action equals
/// `2π(q₂f(t₂) − q₁f(t₁)) + ½∫g′²`, so decreasing the energy decreases the
/// action. Steps are preconditioned by the Dirichlet Laplacian (which makes the
/// unconstrained problem a single step), projected onto the tangent of the
/// integral constraint, and followed by a one-dimensional Newton restoration
/// along `A⁻¹∇c`; an Armijo backtracking search keeps the energy monotone.
pub fn minimize_numerical(c: &BoundaryConstraints, n: usize, max_iter: usize, tol: f64) -> Result<NumericalMinimizer> {
    c.validate()?;
    if n < 4 {
        return Err(invalid("need at least four cells"));
    }
    let dp = c.dp();
    let half = (0.5 * PI * dp).cos();
    let problem = Reduced {
        h: c.dt() / n as f64,
        ga: (PI * c.q1).ln() - 2.0 * half.ln(),
        gb: (PI * c.q2).ln() - 2.0 * half.ln(),
        target: 2.0 * (0.5 * PI * dp).tan(),
    };
    let f_start = -(0.5 * PI * dp).tan();
    let boundary = 2.0 * PI * (0.5 * PI * dp).tan() * (c.q1 + c.q2);
    let m = n - 1;
    let linear: Vec<f64> = (1..n)
        .map(|i| problem.ga + (problem.gb - problem.ga) * i as f64 / n as f64)
        .collect();
    let grad_c = |g: &[f64]| -> Vec<f64> { g.iter().map(|v| problem.h * v.exp()).collect() };
    let bump = problem.solve_laplacian(&vec![problem.h; m]);
    let mut g = problem
        .restore(&linear, &bump)
        .ok_or_else(|| Error::Inconsistent("integral constraint cannot be met".into()))?;
    let mut energy = problem.energy(&g);
    let mut history = vec![boundary + energy];
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    for iter in 0..max_iter {
        iterations = iter;
        let gc = grad_c(&g);
        let ge = problem.energy_gradient(&g);
        let gc_sq = pairwise_sum(&gc.iter().map(|x| x * x).collect::<Vec<_>>());
        let proj = pairwise_sum(&ge.iter().zip(&gc).map(|(a, b)| a * b).collect::<Vec<_>>()) / gc_sq;
        grad_norm = (pairwise_sum(&ge.iter().zip(&gc).map(|(a, b)| (a - proj * b).powi(2)).collect::<Vec<_>>())
            / problem.h)
            .sqrt();
        if grad_norm <= tol {
            return Ok(NumericalMinimizer {
                profile: rebuild(c, &problem, &g, f_start),
                action_history: history,
                iterations: iter,
                grad_norm,
            });
        }
        let v = problem.solve_laplacian(&gc);
        let offset: Vec<f64> = g.iter().zip(&linear).map(|(a, b)| a - b).collect();
        let mu = dot(&gc, &offset) / dot(&gc, &v);
        let dir: Vec<f64> = offset.iter().zip(&v).map(|(o, vi)| -o + mu * vi).collect();
        let slope = -dot(&ge, &dir).abs();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = g.iter().zip(&dir).map(|(x, d)| x + alpha * d).collect();
            if let Some(feasible) = problem.restore(&trial, &v) {
                let e = problem.energy(&feasible);
                if e <= energy + 1e-4 * alpha * slope {
                    accepted = Some((feasible, e));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((next, e)) => {
                g = next;
                energy = e;
                history.push(boundary + energy);
            }
            None => break,
        }
    }
    Err(Error::NotConverged {
        iterations,
        grad_norm,
        last_iterate: g,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    pairwise_sum(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>())
}

fn rebuild(c: &BoundaryConstraints, problem: &Reduced, interior: &[f64], f_start: f64) -> SegmentProfile {
    let mut g = Vec::with_capacity(interior.len() + 2);
    g.push(problem.ga);
    g.extend_from_slice(interior);
    g.push(problem.gb);
    let p = opposite_point(c);
    let mut f = f_start;
    let mut psi = Vec::with_capacity(g.len());
    let mut log_dpsi = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        if i > 0 {
            f += 0.5 * problem.h * (g[i - 1].exp() + g[i].exp());
        }
        psi.push(p + 0.5 + f.atan() / PI);
        log_dpsi.push(g[i] - PI.ln() - (f * f).ln_1p());
    }
    SegmentProfile {
        t1: c.t1,
        t2: c.t2,
        psi,
        log_dpsi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_action_is_exact() {
        let id = GridDiffeo::identity(128);
        assert_eq!(action_value(&id), -2.0 * PI * PI);
        let rot = GridDiffeo::rotation(128, 0.37).unwrap();
        assert_eq!(action_value(&rot), -2.0 * PI * PI);
    }

    #[test]
    fn gradient_vanishes_at_identity() {
        let g = action_gradient(&GridDiffeo::identity(64));
        assert!(g.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn kappa_examples() {
        let c = BoundaryConstraints::new(0.0, 0.5, 0.0, 0.5, 1.0, 1.0).unwrap();
        assert!((kappa_of(&c) - PI / 2.0).abs() < 1e-15);
        let (q, d) = (1.7, 0.3);
        let c = BoundaryConstraints::new(0.1, 0.1 + d, 0.2, 0.2 + d, q, q).unwrap();
        let expected = PI * q * d / (PI * d).sin();
        assert!((kappa_of(&c) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_lambda_examples() {
        let (r, l) = solve_lambda(PI / 2.0, 0.5).unwrap();
        assert_eq!(r, Regime::Sin);
        assert!((l - PI).abs() < 1e-12);
        assert_eq!(solve_lambda(1.0, 0.3).unwrap(), (Regime::Linear, 0.0));
        let (r, l) = solve_lambda(0.5, 0.5).unwrap();
        assert_eq!(r, Regime::Sinh);
        let x = 0.5 * l;
        assert!((x / x.sinh() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_instance_is_identity() {
        let c = BoundaryConstraints::new(0.0, 0.5, 0.0, 0.5, 1.0, 1.0).unwrap();
        let (sol, seg) = minimizer_closed_form(&c, 256).unwrap();
        assert_eq!(sol.regime, Regime::Sin);
        assert!((sol.lambda - PI).abs() < 1e-10);
        let [a, b, cc, d] = sol.mobius.coefficients();
        assert!((a - 1.0).abs() < 1e-12 && b.abs() < 1e-12 && cc.abs() < 1e-12 && (d - 1.0).abs() < 1e-12);
        for i in 0..=256 {
            assert!((seg.psi[i] - seg.tau(i)).abs() < 1e-13);
            assert!(seg.log_dpsi[i].abs() < 1e-13);
        }
    }

    #[test]
    fn inconsistent_data_is_rejected() {
        assert!(BoundaryConstraints::new(0.0, 0.0, 0.0, 0.5, 1.0, 1.0).is_err());
        assert!(BoundaryConstraints::new(0.0, 0.5, 0.0, 0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn euler_lagrange_constant_profile() {
        let (l0, r) = euler_lagrange_residual(&vec![0.3; 129], 0.0, 0.5).unwrap();
        assert_eq!(l0, 0.0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn euler_lagrange_rational_case() {
        let (beta, lambda) = (1.0, 0.8);
        let n = 4096;
        let g: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64 * 0.5;
                -2.0 * (beta + lambda * t).abs().ln()
            })
            .collect();
        let (l0, r) = euler_lagrange_residual(&g, 0.0, 0.5).unwrap();
        assert!((l0 + 2.0 * lambda * lambda).abs() < 1e-6);
        assert!(r < 1e-6);
    }
}
