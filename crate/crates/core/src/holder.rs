//! Hölder regularity through cross ratios and after gauge fixing.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffeo::{cross_ratio, GridDiffeo};
use crate::error::{invalid, Error, Result};
use crate::mobius::gauge_fix;
use crate::quadrature::pairwise_sum;
use crate::rng::stream_rng;

/// Largest ratio over a pair grid and the pair attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderBound {
    pub value: f64,
    pub s: f64,
    pub t: f64,
    pub pairs: usize,
}

/// Both Hölder constants of one diffeomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderReport {
    pub alpha: f64,
    /// Smallest `K` with `|𝒪(φ,s,t) − π/sin(π(t−s))| ≤ K d(s,t)^{α−1}` on the grid.
    pub k_cross: f64,
    /// Smallest `C` with `|ξ̃(t) − ξ̃(s)| ≤ C d(s,t)^α` for the slice representative.
    pub c_classical: f64,
    pub pair_count: usize,
    pub cross_pair: (f64, f64),
    pub classical_pair: (f64, f64),
}

/// Offsets `m` of the ordered pairs `(i/n, (i+m)/n)`.
///
/// Pairs closer than two cells are skipped. Up to `n = 2048` every offset is
/// used; above that only the dyadic scales `2^k` and `3·2^{k−1}` and their
/// mirror images, each with every base point.
fn pair_offsets(n: usize, max_dist: f64) -> Vec<usize> {
    let mut offsets: Vec<usize> = if n <= 2048 {
        (2..=n - 2).collect()
    } else {
        let mut v = Vec::new();
        let mut k = 2;
        while k <= n / 2 {
            v.push(k);
            v.push(n - k);
            if 3 * k / 2 <= n / 2 && k >= 2 {
                v.push(3 * k / 2);
                v.push(n - 3 * k / 2);
            }
            k *= 2;
        }
        v
    };
    offsets.retain(|&m| m >= 2 && m <= n - 2 && (m.min(n - m) as f64) / (n as f64) <= max_dist + 1e-15);
    offsets.sort_unstable();
    offsets.dedup();
    offsets
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

fn grid_max(n: usize, max_dist: f64, ratio: impl Fn(usize, usize, usize) -> f64 + Sync) -> HolderBound {
    let offsets = pair_offsets(n, max_dist);
    let per_offset: Vec<(f64, usize, usize)> = offsets
        .par_iter()
        .map(|&m| {
            let mut best = (0.0, 0, m);
            for i in 0..n {
                let v = ratio(i, (i + m) % n, m);
                if v > best.0 {
                    best = (v, i, (i + m) % n);
                }
            }
            best
        })
        .collect();
    let mut best = (0.0, 0, 0);
    for b in per_offset {
        if b.0 > best.0 {
            best = b;
        }
    }
    HolderBound {
        value: best.0,
        s: best.1 as f64 / n as f64,
        t: best.2 as f64 / n as f64,
        pairs: offsets.len() * n,
    }
}

/// `max |𝒪(φ,s,t) − π/sin(π(t−s))| · d(s,t)^{1−α}` over grid pairs.
pub fn holder_constant_cross_ratio(diffeo: &GridDiffeo, alpha: f64) -> Result<HolderBound> {
    holder_constant_cross_ratio_within(diffeo, alpha, 0.5)
}

/// [`holder_constant_cross_ratio`] restricted to pairs at distance `≤ radius`.
pub fn holder_constant_cross_ratio_within(diffeo: &GridDiffeo, alpha: f64, radius: f64) -> Result<HolderBound> {
    check_alpha(alpha)?;
    let n = diffeo.n();
    let nf = n as f64;
    Ok(grid_max(n, radius, |i, j, m| {
        let arc = m as f64 / nf;
        let d = arc.min(1.0 - arc);
        let reference = PI / (PI * d).sin();
        (diffeo.node_cross_ratio(i, j) - reference).abs() * d.powf(1.0 - alpha)
    }))
}

/// `max |ξ̃(t) − ξ̃(s)| / d(s,t)^α` for the gauge-fixed representative.
pub fn holder_constant_classical(diffeo: &GridDiffeo, alpha: f64) -> Result<HolderBound> {
    check_alpha(alpha)?;
    let (_, fixed) = gauge_fix(diffeo)?;
    Ok(raw_classical_seminorm(&fixed, alpha))
}

/// The classical Hölder seminorm of `ξ` without gauge fixing.
pub fn raw_classical_seminorm(diffeo: &GridDiffeo, alpha: f64) -> HolderBound {
    let n = diffeo.n();
    let nf = n as f64;
    let xi = diffeo.xi();
    grid_max(n, 0.5, |i, j, m| {
        let arc = m as f64 / nf;
        let d = arc.min(1.0 - arc);
        (xi[j] - xi[i]).abs() / d.powf(alpha)
    })
}

/// Both constants for one element.
pub fn holder_report(diffeo: &GridDiffeo, alpha: f64) -> Result<HolderReport> {
    let cross = holder_constant_cross_ratio(diffeo, alpha)?;
    let classical = holder_constant_classical(diffeo, alpha)?;
    Ok(HolderReport {
        alpha,
        k_cross: cross.value,
        c_classical: classical.value,
        pair_count: cross.pairs,
        cross_pair: (cross.s, cross.t),
        classical_pair: (classical.s, classical.t),
    })
}

/// Reports over a family together with their rank agreement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceScan {
    pub reports: Vec<HolderReport>,
    /// Spearman correlation of the two constants; `None` if either is constant.
    pub rank_correlation: Option<f64>,
    /// Both constants strictly decrease along the family order.
    pub monotone: bool,
}

/// Computes both constants across a family, e.g. one profile at shrinking scales.
pub fn equivalence_scan(family: &[GridDiffeo], alpha: f64) -> Result<EquivalenceScan> {
    if family.is_empty() {
        return Err(invalid("family must be nonempty"));
    }
    let reports = family
        .iter()
        .map(|d| holder_report(d, alpha))
        .collect::<Result<Vec<_>>>()?;
    let k: Vec<f64> = reports.iter().map(|r| r.k_cross).collect();
    let c: Vec<f64> = reports.iter().map(|r| r.c_classical).collect();
    let monotone = k.windows(2).all(|w| w[1] < w[0]) && c.windows(2).all(|w| w[1] < w[0]);
    Ok(EquivalenceScan {
        rank_correlation: spearman(&k, &c),
        monotone,
        reports,
    })
}

/// Periodic random Fourier profile `Σ k^{−(H+½)}(a_k(cos 2πkt − 1) + b_k sin 2πkt)`
/// over `k < n/2`, scaled to unit sup norm; `ξ(0) = ξ(1) = 0`.
pub fn rough_profile(n: usize, hurst: f64, seed: u64) -> Vec<f64> {
    let modes: Vec<(f64, f64, f64)> = (1..(n / 2).max(2))
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (k as f64, a * (k as f64).powf(-hurst - 0.5), b * (k as f64).powf(-hurst - 0.5))
        })
        .collect();
    let mut xi: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / n as f64;
            let terms: Vec<f64> = modes
                .iter()
                .map(|&(k, a, b)| {
                    let (s, c) = (2.0 * PI * k * t).sin_cos();
                    a * (c - 1.0) + b * s
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    xi[0] = 0.0;
    xi[n] = 0.0;
    let top = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top > 0.0 {
        xi.iter_mut().for_each(|v| *v /= top);
    }
    xi
}

/// `ε·profile` for each scale, as diffeomorphisms with `θ = 0`.
pub fn scaled_family(profile: &[f64], scales: &[f64]) -> Result<Vec<GridDiffeo>> {
    scales
        .iter()
        .map(|&e| GridDiffeo::new(profile.iter().map(|v| e * v).collect(), 0.0))
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

/// Positive arcs between consecutive points; errors unless the points are
/// distinct and cyclically ordered.
fn ordered_arcs<const N: usize>(points: [f64; N]) -> Result<[f64; N]> {
    let mut arcs = [0.0; N];
    for k in 0..N {
        let next = points[(k + 1) % N];
        arcs[k] = crate::diffeo::wrap_unit(next - points[k]);
    }
    let total: f64 = arcs.iter().sum();
    if arcs.iter().any(|a| *a == 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "points {points:?} are not distinct and cyclically ordered"
        )));
    }
    Ok(arcs)
}

/// Relative residual of `1/(𝒪₁₃𝒪₂₄) = 1/(𝒪₁₂𝒪₃₄) + 1/(𝒪₁₄𝒪₂₃)`.
pub fn cocycle_residual(diffeo: &GridDiffeo, taus: [f64; 4]) -> Result<f64> {
    ordered_arcs(taus)?;
    let o = |i: usize, j: usize| cross_ratio(diffeo, taus[i], taus[j]);
    let lhs = 1.0 / (o(0, 2)? * o(1, 3)?);
    let a = 1.0 / (o(0, 1)? * o(2, 3)?);
    let b = 1.0 / (o(0, 3)? * o(1, 2)?);
    Ok((lhs - a - b).abs() / lhs.max(a).max(b))
}

/// Outcome of the two-sided cross-ratio inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichOutcome {
    pub holds: bool,
    /// Smallest relative slack of the two inequalities.
    pub margin: f64,
}

/// `𝒪(s,t₁)𝒪(s₁,t)/𝒪(s₁,t₁) < 𝒪(s,t) < 𝒪(s,t₂)𝒪(s₁,t)/𝒪(s₁,t₂)` for
/// points ordered `s, s₁, t₁, t, t₂`.
pub fn sandwich_check(diffeo: &GridDiffeo, points: [f64; 5]) -> Result<SandwichOutcome> {
    ordered_arcs(points)?;
    let [s, s1, t1, t, t2] = points;
    let o = |a: f64, b: f64| cross_ratio(diffeo, a, b);
    let middle = o(s, t)?;
    let lower = o(s, t1)? * o(s1, t)? / o(s1, t1)?;
    let upper = o(s, t2)? * o(s1, t)? / o(s1, t2)?;
    let margin = (middle / lower - 1.0).min(upper / middle - 1.0);
    Ok(SandwichOutcome {
        holds: lower < middle && middle < upper,
        margin,
    })
}
