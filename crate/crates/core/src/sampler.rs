//! Brownian-bridge sampling, the pushforward measure on circle
//! diffeomorphisms, Schwarzian importance weights and the Monte Carlo
//! experiments built on them.
//!
//! Sample `i` of every experiment draws from stream `(seed, stream_id(block, i))`,
//! so results are independent of the worker count and the same stream is
//! reused across `σ` values (common random numbers).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{profile_action, profile_gradient};
use crate::diffeo::{derivative_energy, p_inverse, GridDiffeo};
use crate::error::{invalid, Error, Result};
use crate::holder::holder_constant_cross_ratio;
use crate::mobius::gauge_fix;
use crate::quadrature::{log_sum_exp, pairwise_sum};
use crate::rng::{stream_id, stream_rng};

/// Rows with a smaller effective sample size are flagged unreliable.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;
/// Upper end of the admissible `σ` range for [`holder_tail_scan`].
pub const SIGMA_CEILING: f64 = 2.0;
/// Iteration cap of the ball-constrained minimizer behind `rate_prediction`.
pub const RATE_MAX_ITER: usize = 10_000;

const MU_BLOCK: u64 = 1;
const TILT_BLOCK: u64 = 2;
const NAIVE_BLOCK: u64 = 3;

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

fn check_grid(n: usize) -> Result<()> {
    if n < 16 {
        return Err(invalid(format!("need n >= 16, got {n}")));
    }
    Ok(())
}

/// Total mass `1/(√(2π)σ)` of the unnormalised bridge measure.
pub fn bridge_mass(sigma: f64) -> f64 {
    1.0 / ((2.0 * PI).sqrt() * sigma)
}

/// Brownian bridge of variance `σ²` on `n + 1` nodes by midpoint refinement:
/// given the values at `i < j`, the value at `m = ⌊(i+j)/2⌋` is Gaussian with the
/// linear interpolant as mean and variance `σ²(m−i)(j−m)h/(j−i)`.
pub fn bridge_from<R: Rng + ?Sized>(rng: &mut R, sigma: f64, n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut x = vec![0.0; n + 1];
    let mut stack = vec![(0usize, n)];
    while let Some((i, j)) = stack.pop() {
        if j - i < 2 {
            continue;
        }
        let m = (i + j) / 2;
        let (a, b) = ((m - i) as f64 * h, (j - m) as f64 * h);
        let mean = (x[i] * b + x[j] * a) / (a + b);
        let z: f64 = rng.sample(StandardNormal);
        x[m] = mean + sigma * (a * b / (a + b)).sqrt() * z;
        stack.push((m, j));
        stack.push((i, m));
    }
    x
}

/// Bridge as `W(t) − tW(1)` from independent Brownian increments.
pub fn bridge_from_walk<R: Rng + ?Sized>(rng: &mut R, sigma: f64, n: usize) -> Vec<f64> {
    let sd = sigma / (n as f64).sqrt();
    let mut w = Vec::with_capacity(n + 1);
    w.push(0.0);
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        w.push(w[i] + sd * z);
    }
    let end = w[n];
    let mut out: Vec<f64> = w.iter().enumerate().map(|(i, v)| v - end * i as f64 / n as f64).collect();
    out[n] = 0.0;
    out
}

pub fn bridge_sample(sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    check_grid(n)?;
    Ok(bridge_from(&mut stream_rng(seed, 0), sigma, n))
}

fn mu_from<R: Rng + ?Sized>(rng: &mut R, sigma: f64, n: usize) -> Result<GridDiffeo> {
    let theta: f64 = rng.random();
    GridDiffeo::new(bridge_from(rng, sigma, n), theta)
}

/// `φ = rotation_θ ∘ 𝖯(ξ)` with `θ` uniform and `ξ` a bridge of variance `σ²`.
pub fn mu_sample(sigma: f64, n: usize, seed: u64) -> Result<GridDiffeo> {
    check_sigma(sigma)?;
    check_grid(n)?;
    mu_from(&mut stream_rng(seed, 0), sigma, n)
}

/// `(2π²/σ²)·∫φ′²`; never below `2π²/σ²`.
pub fn schwarzian_log_weight(diffeo: &GridDiffeo, sigma2: f64) -> f64 {
    2.0 * PI * PI / sigma2 * diffeo.derivative_energy()
}

/// A draw from the pushforward measure with its Schwarzian log weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub diffeo: GridDiffeo,
    pub log_weight: f64,
    pub seed: u64,
    pub stream: u64,
}

impl WeightedSample {
    pub fn draw(sigma: f64, n: usize, seed: u64, stream: u64) -> Result<Self> {
        check_sigma(sigma)?;
        check_grid(n)?;
        let diffeo = mu_from(&mut stream_rng(seed, stream), sigma, n)?;
        let log_weight = schwarzian_log_weight(&diffeo, sigma * sigma);
        Ok(Self {
            diffeo,
            log_weight,
            seed,
            stream,
        })
    }
}

/// `samples` weighted draws on streams `stream_id(block, i)`.
pub fn weighted_samples(sigma: f64, n: usize, samples: usize, seed: u64) -> Result<Vec<WeightedSample>> {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| WeightedSample::draw(sigma, n, seed, stream_id(MU_BLOCK, i)))
        .collect()
}

/// `n·Σ Δa·Δb`, the discrete `∫a′b′`.
fn h1_inner(a: &[f64], b: &[f64]) -> f64 {
    let n = (a.len() - 1) as f64;
    let terms: Vec<f64> = a.windows(2).zip(b.windows(2)).map(|(x, y)| (x[1] - x[0]) * (y[1] - y[0])).collect();
    n * pairwise_sum(&terms)
}

fn check_center(center: &[f64]) -> Result<()> {
    let n = center.len().saturating_sub(1);
    check_grid(n)?;
    if center[0] != 0.0 || center[n] != 0.0 {
        return Err(Error::Precondition(format!(
            "center must vanish at both ends, got {} and {}",
            center[0], center[n]
        )));
    }
    if center.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite center"));
    }
    Ok(())
}

fn tilted_from<R: Rng + ?Sized>(rng: &mut R, center: &[f64], sigma: f64) -> (Vec<f64>, f64) {
    let n = center.len() - 1;
    let b = bridge_from(rng, sigma, n);
    let log_rn = -(h1_inner(center, &b) + 0.5 * h1_inner(center, center)) / (sigma * sigma);
    (center.iter().zip(&b).map(|(c, v)| c + v).collect(), log_rn)
}

/// `center + B` and `log d(law of B)/d(law of center + B)` at the returned path.
///
/// Averaging `e^{log ratio}·X(path)` over tilted draws is unbiased for the
/// untilted mean of `X`.
pub fn tilted_bridge_sample(center: &[f64], sigma: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
    check_sigma(sigma)?;
    check_center(center)?;
    Ok(tilted_from(&mut stream_rng(seed, 0), center, sigma))
}

/// Self-normalised weights from log weights; returns `(weights / max, ess)`.
fn normalised(log_w: &[f64]) -> (Vec<f64>, f64) {
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|v| (v - top).exp()).collect();
    let sum = pairwise_sum(&w);
    let sq: Vec<f64> = w.iter().map(|v| v * v).collect();
    let ess = sum * sum / pairwise_sum(&sq);
    (w, ess)
}

/// Mean of `e^{ℓ_i}` over `total` draws (absent terms count as zero), as a log,
/// with the relative standard error of the mean.
fn log_mean_exp(log_terms: &[f64], total: usize) -> (f64, f64) {
    if log_terms.is_empty() {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let top = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_terms.iter().map(|v| (v - top).exp()).collect();
    let nf = total as f64;
    let mean = pairwise_sum(&w) / nf;
    let second = pairwise_sum(&w.iter().map(|v| v * v).collect::<Vec<_>>()) / nf;
    let rel = ((second - mean * mean).max(0.0) / (nf * mean * mean)).sqrt();
    (log_sum_exp(log_terms) - nf.ln(), rel)
}

/// Small-ball probability `P(sup|ξ| < radius)` estimated both naively and
/// under the tilt towards `center`; `(naive, naive_se, tilted, tilted_se)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallEstimate {
    pub naive: f64,
    pub naive_se: f64,
    pub tilted: f64,
    pub tilted_se: f64,
}

pub fn ball_probability(center: &[f64], ball_center: &[f64], radius: f64, sigma: f64, samples: usize, seed: u64) -> Result<BallEstimate> {
    check_sigma(sigma)?;
    check_center(center)?;
    if ball_center.len() != center.len() {
        return Err(invalid("ball center and tilt center differ in length"));
    }
    let n = center.len() - 1;
    let inside = |x: &[f64]| x.iter().zip(ball_center).all(|(a, b)| (a - b).abs() < radius);
    let naive: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = bridge_from(&mut stream_rng(seed, stream_id(NAIVE_BLOCK, i)), sigma, n);
            if inside(&x) { 1.0 } else { 0.0 }
        })
        .collect();
    let tilted: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let (x, log_rn) = tilted_from(&mut stream_rng(seed, stream_id(TILT_BLOCK, i)), center, sigma);
            if inside(&x) { log_rn.exp() } else { 0.0 }
        })
        .collect();
    let stats = |v: &[f64]| {
        let nf = v.len() as f64;
        let mean = pairwise_sum(v) / nf;
        let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        (mean, (pairwise_sum(&dev) / (nf - 1.0) / nf).sqrt())
    };
    let (naive, naive_se) = stats(&naive);
    let (tilted, tilted_se) = stats(&tilted);
    Ok(BallEstimate {
        naive,
        naive_se,
        tilted,
        tilted_se,
    })
}

/// One row of the large-deviation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpRateRow {
    pub sigma2: f64,
    pub log_mass_estimate: f64,
    pub rate_prediction: f64,
    pub std_error: f64,
    pub effective_samples: f64,
    pub inside: usize,
    pub unreliable: bool,
}

impl LdpRateRow {
    pub fn gap(&self) -> f64 {
        (self.log_mass_estimate - self.rate_prediction).abs()
    }
}

/// `sup (F − ½∫ξ′²)` over the sup-norm ball of `radius` around `center`, by
/// projected gradient descent on the action with backtracking.
pub fn rate_prediction(center: &[f64], radius: f64, max_iter: usize) -> f64 {
    let n = center.len() - 1;
    let project = |x: &mut Vec<f64>| {
        for (v, c) in x.iter_mut().zip(center) {
            *v = v.clamp(c - radius, c + radius);
        }
        x[0] = 0.0;
        x[n] = 0.0;
    };
    let mut x = center.to_vec();
    let mut value = profile_action(&x);
    let mut step = 0.25 / n as f64;
    for _ in 0..max_iter {
        let g = profile_gradient(&x);
        let mut moved = false;
        while step > 1e-18 {
            let mut trial = x.clone();
            for (k, gk) in g.iter().enumerate().take(n - 1) {
                trial[k + 1] -= step * gk;
            }
            project(&mut trial);
            let dist2: f64 = trial.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            let tv = profile_action(&trial);
            if tv <= value - 1e-4 * dist2 / step && dist2 > 0.0 {
                moved = (value - tv).abs() > 1e-15 * value.abs();
                x = trial;
                value = tv;
                step *= 1.5;
                break;
            }
            if dist2 == 0.0 {
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    -value
}

/// `σ²·log[(1/(√(2π)σ))·E(e^{F(ξ)/σ²}·1{‖ξ − ξ₀‖∞ < radius})]` for each `σ²`, with
/// `ξ₀ = 𝖯⁻¹(center)`, sampled from the bridge tilted to `ξ₀`.
pub fn ldp_rate_table(center: &GridDiffeo, radius: f64, sigma2s: &[f64], samples: usize, seed: u64) -> Result<Vec<LdpRateRow>> {
    if !(radius > 0.0) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let xi0 = p_inverse(center);
    check_center(&xi0)?;
    let rate = rate_prediction(&xi0, radius, RATE_MAX_ITER);
    sigma2s
        .iter()
        .map(|&sigma2| {
            let sigma = sigma2.sqrt();
            check_sigma(sigma)?;
            let terms: Vec<Option<f64>> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let (x, log_rn) = tilted_from(&mut stream_rng(seed, stream_id(TILT_BLOCK, i)), &xi0, sigma);
                    let inside = x.iter().zip(&xi0).all(|(a, b)| (a - b).abs() < radius);
                    inside.then(|| 2.0 * PI * PI * derivative_energy(&x) / sigma2 + log_rn)
                })
                .collect();
            let terms: Vec<f64> = terms.into_iter().flatten().collect();
            let (log_mean, rel) = log_mean_exp(&terms, samples);
            let ess = if terms.is_empty() { 0.0 } else { normalised(&terms).1 };
            Ok(LdpRateRow {
                sigma2,
                log_mass_estimate: sigma2 * (bridge_mass(sigma).ln() + log_mean),
                rate_prediction: rate,
                std_error: sigma2 * rel,
                effective_samples: ess,
                inside: terms.len(),
                unreliable: ess < MIN_EFFECTIVE_SAMPLES,
            })
        })
        .collect()
}

/// Weighted mean distance of the gauge-fixed sample to the identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub sigma: f64,
    pub mean_distance: f64,
    pub effective_samples: f64,
    pub max_weight_ratio: f64,
    pub unreliable: bool,
}

/// Self-normalised estimate, under `μ` reweighted by `e^{F/σ²}`, of the mean
/// sup-distance between the gauge-fixed sample and the identity.
pub fn concentration_experiment(sigmas: &[f64], n: usize, samples: usize, seed: u64) -> Result<Vec<ConcentrationRow>> {
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    sigmas
        .iter()
        .map(|&sigma| {
            check_sigma(sigma)?;
            check_grid(n)?;
            let draws: Vec<(f64, f64)> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let s = WeightedSample::draw(sigma, n, seed, stream_id(MU_BLOCK, i))?;
                    let (_, fixed) = gauge_fix(&s.diffeo)?;
                    Ok((s.log_weight, fixed.sup_distance_to_identity()))
                })
                .collect::<Result<_>>()?;
            let log_w: Vec<f64> = draws.iter().map(|d| d.0).collect();
            let (w, ess) = normalised(&log_w);
            let total = pairwise_sum(&w);
            let weighted: Vec<f64> = w.iter().zip(&draws).map(|(wi, d)| wi * d.1).collect();
            let top = w.iter().cloned().fold(0.0, f64::max);
            Ok(ConcentrationRow {
                sigma,
                mean_distance: pairwise_sum(&weighted) / total,
                effective_samples: ess,
                max_weight_ratio: top / total,
                unreliable: ess < MIN_EFFECTIVE_SAMPLES,
            })
        })
        .collect()
}

/// Weighted fraction of samples whose cross-ratio Hölder constant exceeds `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderTailRow {
    pub sigma: f64,
    pub alpha: f64,
    pub m: f64,
    pub fraction: f64,
    pub effective_samples: f64,
    pub unreliable: bool,
}

pub fn holder_tail_scan(sigma: f64, alpha: f64, m_values: &[f64], n: usize, samples: usize, seed: u64) -> Result<Vec<HolderTailRow>> {
    check_sigma(sigma)?;
    if sigma >= SIGMA_CEILING {
        return Err(invalid(format!("sigma must lie below {SIGMA_CEILING}, got {sigma}")));
    }
    if !(0.25..0.5).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [1/4, 1/2), got {alpha}")));
    }
    if n < 64 {
        return Err(invalid(format!("need n >= 64, got {n}")));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let draws: Vec<(f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = WeightedSample::draw(sigma, n, seed, stream_id(MU_BLOCK, i))?;
            Ok((s.log_weight, holder_constant_cross_ratio(&s.diffeo, alpha)?.value))
        })
        .collect::<Result<_>>()?;
    let log_w: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let (w, ess) = normalised(&log_w);
    let total = pairwise_sum(&w);
    Ok(m_values
        .iter()
        .map(|&m| {
            let hit: Vec<f64> = w.iter().zip(&draws).map(|(wi, d)| if d.1 > m { *wi } else { 0.0 }).collect();
            HolderTailRow {
                sigma,
                alpha,
                m,
                fraction: pairwise_sum(&hit) / total,
                effective_samples: ess,
                unreliable: ess < MIN_EFFECTIVE_SAMPLES,
            }
        })
        .collect())
}
