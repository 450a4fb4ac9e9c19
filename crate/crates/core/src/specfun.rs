//! Special functions and the exact-formula quadratures of the theory.
//!
//! Every integrand built from `Γ(l/2 ± ik ± iw)` and `sinh(2πk)` is evaluated in
//! log space and exponentiated once per node, with a max shift.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{log_sinh, log_weighted_sum, pairwise_sum, tanh_sinh, GaussLegendre};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Principal branch of `log Γ(z)`, continuous from the positive real axis.
///
/// Lanczos (g = 7, 9 terms) on `Re z >= 1/2`; left of that the argument is
/// shifted right with `Γ(z) = Γ(z + m) / (z (z+1) ... (z+m-1))`.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid(format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(format!("{}", z.re)));
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    let m = (0.5 - z.re).ceil() as usize;
    let mut shift = Complex64::new(0.0, 0.0);
    for k in 0..m {
        shift += (z + k as f64).ln();
    }
    Ok(lanczos(z + m as f64) - shift)
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + acc.ln() + LN_SQRT_2PI
}

/// `log Γ(x)` for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    lanczos(Complex64::new(x, 0.0)).re
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `log Γ(l/2 ± ik ± iw)`: the log of the four-factor product.
pub fn log_gamma_quad(l: f64, k: f64, w: f64) -> f64 {
    let a = lanczos(Complex64::new(0.5 * l, k + w)).re;
    let b = lanczos(Complex64::new(0.5 * l, k - w)).re;
    2.0 * (a + b)
}

/// `Γ(l/2 ± ik ± iw)` as a positive real number.
///
/// Pairing each factor with its conjugate gives
/// `|Γ(l/2 + i(k+w))|² |Γ(l/2 + i(k−w))|²`.
pub fn gamma_quad(l: f64, k: f64, w: f64) -> f64 {
    log_gamma_quad(l, k, w).exp()
}

/// `(arccosh u)²` continued to `−(arccos u)²` on `(−1, 1)`.
pub fn arccosh_sq(u: f64) -> Result<f64> {
    if !(u > -1.0) || !u.is_finite() {
        return Err(Error::Domain(format!("arccosh_sq needs u > -1, got {u}")));
    }
    Ok(arccosh_sq_shifted(u - 1.0))
}

/// `arccosh_sq(1 + e)`, accurate when `e` is tiny.
pub fn arccosh_sq_shifted(e: f64) -> f64 {
    if e >= 0.0 {
        let a = (e + (e * (2.0 + e)).sqrt()).ln_1p();
        a * a
    } else {
        let a = 2.0 * (-0.5 * e).sqrt().asin();
        -a * a
    }
}

/// Truncations and tolerances for the series and integrals of this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Initial series truncation order.
    pub l_max: usize,
    /// Initial frequency cutoff; escalated automatically.
    pub w_max: f64,
    /// Gauss–Legendre nodes per panel.
    pub n_nodes: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            l_max: 40,
            w_max: 8.0,
            n_nodes: 16,
            abs_tol: 1e-10,
            rel_tol: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.l_max < 1 {
            return Err(invalid("l_max must be at least 1"));
        }
        if !(self.w_max > 0.0) {
            return Err(invalid("w_max must be positive"));
        }
        if self.n_nodes < 16 {
            return Err(invalid("n_nodes must be at least 16"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

const PANEL_WIDTH: f64 = 0.5;
const MAX_ESCALATIONS: usize = 12;
const MAX_NODES_PER_AXIS: usize = 200_000;

fn axis_nodes(rule: &GaussLegendre, cutoff: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = (cutoff / PANEL_WIDTH).ceil() as usize;
    rule.composite(0.0, cutoff, panels).into_iter().unzip()
}

/// Partition function: the closed form next to an independent quadrature.
///
/// When `log_domain` is set both numbers are natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionFunction {
    pub sigma2: f64,
    pub log_domain: bool,
    pub closed_form: f64,
    pub quadrature: f64,
    /// Upper bound on the neglected tail, relative to the quadrature value.
    pub tail_bound: f64,
}

impl PartitionFunction {
    pub fn log_closed_form(&self) -> f64 {
        if self.log_domain {
            self.closed_form
        } else {
            self.closed_form.ln()
        }
    }

    pub fn log_quadrature(&self) -> f64 {
        if self.log_domain {
            self.quadrature
        } else {
            self.quadrature.ln()
        }
    }

    /// Relative difference between the two evaluations.
    pub fn rel_diff(&self) -> f64 {
        (self.log_quadrature() - self.log_closed_form()).exp_m1().abs()
    }
}

/// `log((2π/σ²)^{3/2} e^{2π²/σ²})`.
pub fn log_partition_closed_form(sigma2: f64) -> f64 {
    1.5 * (2.0 * PI / sigma2).ln() + 2.0 * PI * PI / sigma2
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(())
}

/// `(2π/σ²)^{3/2} e^{2π²/σ²}` against `∫₀^∞ e^{−σ²k²/2} sinh(2πk) 2k dk`.
pub fn partition_function(sigma2: f64, spec: &QuadratureSpec) -> Result<PartitionFunction> {
    check_sigma2(sigma2)?;
    spec.validate()?;
    let log_domain = 2.0 * PI * PI / sigma2 > 600.0;
    let log_f = |k: f64| -0.5 * sigma2 * k * k + log_sinh(2.0 * PI * k) + (2.0 * k).ln();
    let peak = 2.0 * PI / sigma2;
    let sigma = sigma2.sqrt();
    let log_peak = log_f(peak);
    let target = spec.rel_tol.min(spec.abs_tol).ln() - 10.0;
    let mut reach = (2.0 * -target).sqrt() / sigma;
    let mut cutoff = (peak + reach).max(spec.w_max);
    let mut escalations = 0;
    while log_f(cutoff) - log_peak > target {
        reach *= 1.5;
        cutoff = peak + reach;
        escalations += 1;
        if escalations > MAX_ESCALATIONS {
            return Err(Error::ConvergenceFailure {
                what: "partition function cutoff".into(),
                diagnostics: format!("cutoff {cutoff}, sigma2 {sigma2}"),
            });
        }
    }
    let width = PANEL_WIDTH * sigma.recip().min(1.0);
    let panels = (cutoff / width).ceil() as usize;
    let rule = GaussLegendre::new(spec.n_nodes);
    let (nodes, weights): (Vec<f64>, Vec<f64>) = rule.composite(0.0, cutoff, panels).into_iter().unzip();
    let logs: Vec<f64> = nodes.iter().map(|&k| log_f(k)).collect();
    let log_quad = log_weighted_sum(&logs, &weights);
    let slope = sigma2 * cutoff - 2.0 * PI - 1.0 / cutoff;
    let tail_bound = if slope > 0.0 {
        (log_f(cutoff) - log_quad).exp() / slope
    } else {
        f64::INFINITY
    };
    let log_closed = log_partition_closed_form(sigma2);
    let (closed_form, quadrature) = if log_domain {
        (log_closed, log_quad)
    } else {
        (log_closed.exp(), log_quad.exp())
    };
    Ok(PartitionFunction {
        sigma2,
        log_domain,
        closed_form,
        quadrature,
        tail_bound,
    })
}

/// A positive integral carried with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub log_value: f64,
    /// Estimated truncation error, absolute.
    pub error_estimate: f64,
    pub cutoffs: [f64; 2],
    pub nodes: usize,
}

struct MomentIntegrand {
    l: f64,
    delta: f64,
    sigma2: f64,
    constant: f64,
}

impl MomentIntegrand {
    fn new(l: u32, delta: f64, sigma2: f64) -> Self {
        let lf = l as f64;
        let constant = -(2.0 * PI * PI).ln() - ln_gamma(lf) + lf * (0.5 * sigma2).ln();
        Self {
            l: lf,
            delta,
            sigma2,
            constant,
        }
    }

    fn axis_term(&self, k: f64, share: f64) -> f64 {
        -0.5 * share * self.sigma2 * k * k + log_sinh(2.0 * PI * k) + (2.0 * k).ln()
    }

    fn log_at(&self, k1: f64, k2: f64, a1: f64, a2: f64) -> f64 {
        self.constant + log_gamma_quad(self.l, k1, k2) + a1 + a2
    }

    /// Log of the weighted sum over a tensor grid, reduced in row order.
    fn log_tensor_sum(&self, n1: &[f64], w1: &[f64], n2: &[f64], w2: &[f64]) -> (f64, f64) {
        let a1: Vec<f64> = n1.iter().map(|&k| self.axis_term(k, self.delta)).collect();
        let a2: Vec<f64> = n2.iter().map(|&k| self.axis_term(k, 1.0 - self.delta)).collect();
        let rows: Vec<(f64, f64, f64)> = (0..n1.len())
            .into_par_iter()
            .map(|i| {
                let logs: Vec<f64> = (0..n2.len())
                    .map(|j| self.log_at(n1[i], n2[j], a1[i], a2[j]))
                    .collect();
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let terms: Vec<f64> = logs
                    .iter()
                    .zip(w2)
                    .map(|(l, w)| w * (l - m).exp())
                    .collect();
                (m + w1[i].ln(), pairwise_sum(&terms), logs[logs.len() - 1])
            })
            .collect();
        let m = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = rows.iter().map(|r| r.1 * (r.0 - m).exp()).collect();
        let total = m + pairwise_sum(&scaled).ln();
        let last_row = self.log_edge_row(n1[n1.len() - 1], n2);
        let last_col = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
        (total, last_row.max(last_col))
    }

    fn log_edge_row(&self, k1: f64, n2: &[f64]) -> f64 {
        let a1 = self.axis_term(k1, self.delta);
        n2.iter()
            .map(|&k2| self.log_at(k1, k2, a1, self.axis_term(k2, 1.0 - self.delta)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn log_edge_col(&self, k2: f64, n1: &[f64]) -> f64 {
        let a2 = self.axis_term(k2, 1.0 - self.delta);
        n1.iter()
            .map(|&k1| self.log_at(k1, k2, self.axis_term(k1, self.delta), a2))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn log_peak_estimate(&self, n1: &[f64], n2: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let step1 = (n1.len() / 64).max(1);
        let step2 = (n2.len() / 64).max(1);
        for &k1 in n1.iter().step_by(step1) {
            let a1 = self.axis_term(k1, self.delta);
            for &k2 in n2.iter().step_by(step2) {
                let a2 = self.axis_term(k2, 1.0 - self.delta);
                best = best.max(self.log_at(k1, k2, a1, a2));
            }
        }
        best
    }
}

fn initial_cutoffs(delta: f64, sigma2: f64, spec: &QuadratureSpec) -> [f64; 2] {
    let peak = 2.0 * PI / sigma2;
    let range = 2.0 * (-(spec.rel_tol.ln()) + 20.0);
    [
        (peak + (range / (delta * sigma2)).sqrt()).max(spec.w_max),
        (peak + (range / ((1.0 - delta) * sigma2)).sqrt()).max(spec.w_max),
    ]
}

fn check_moment_args(l: u32, delta: f64, sigma2: f64) -> Result<()> {
    check_sigma2(sigma2)?;
    if l == 0 {
        return Err(invalid("moment order must be a positive integer"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0,1), got {delta}")));
    }
    Ok(())
}

/// `∫∫ Γ(l/2±ik₁±ik₂)/(2π²Γ(l)) (σ²/2)^l e^{−Δσ²k₁²/2 − (1−Δ)σ²k₂²/2} sinh(2πk₁)2k₁ sinh(2πk₂)2k₂`.
///
/// This is the `l`-th moment of the cross-ratio observable at separation `Δ`
/// under the Schwarzian measure. Composite Gauss–Legendre on a tensor grid;
/// each cutoff grows by half until the integrand on the far edge of the box is
/// below `rel_tol · e^{-8}` of its peak. The integrand decays like a Gaussian
/// beyond the peak, so the edge value times the Gaussian width bounds the tail.
pub fn moment_integral(l: u32, delta: f64, sigma2: f64, spec: &QuadratureSpec) -> Result<MomentEstimate> {
    check_moment_args(l, delta, sigma2)?;
    spec.validate()?;
    let integrand = MomentIntegrand::new(l, delta, sigma2);
    let rule = GaussLegendre::new(spec.n_nodes);
    let mut cutoffs = initial_cutoffs(delta, sigma2, spec);
    let target = spec.rel_tol.ln() - 8.0;
    for _ in 0..=MAX_ESCALATIONS {
        let (n1, w1) = axis_nodes(&rule, cutoffs[0]);
        let (n2, w2) = axis_nodes(&rule, cutoffs[1]);
        if n1.len() > MAX_NODES_PER_AXIS || n2.len() > MAX_NODES_PER_AXIS {
            break;
        }
        let peak = integrand.log_peak_estimate(&n1, &n2);
        let edge1 = integrand.log_edge_row(cutoffs[0], &n2);
        let edge2 = integrand.log_edge_col(cutoffs[1], &n1);
        let mut grown = false;
        if edge1 - peak > target {
            cutoffs[0] *= 1.5;
            grown = true;
        }
        if edge2 - peak > target {
            cutoffs[1] *= 1.5;
            grown = true;
        }
        if grown {
            continue;
        }
        let (log_value, log_edge) = integrand.log_tensor_sum(&n1, &w1, &n2, &w2);
        let width = 1.0 / (sigma2 * delta.min(1.0 - delta)).sqrt();
        let value = log_value.exp();
        let error_estimate = (log_edge + width.ln() + cutoffs[0].max(cutoffs[1]).ln()).exp();
        return Ok(MomentEstimate {
            value,
            log_value,
            error_estimate,
            cutoffs,
            nodes: n1.len() * n2.len(),
        });
    }
    Err(Error::ConvergenceFailure {
        what: format!("moment integral l={l}, delta={delta}, sigma2={sigma2}"),
        diagnostics: format!("cutoffs reached {:?} without the edge decaying", cutoffs),
    })
}

/// The same moment integral by composite tanh-sinh on unit panels.
///
/// Shares only the integrand with [`moment_integral`]; used to pin values by
/// two unrelated node sets.
pub fn moment_integral_tanh_sinh(l: u32, delta: f64, sigma2: f64, cutoffs: [f64; 2], step: f64) -> Result<f64> {
    check_moment_args(l, delta, sigma2)?;
    let integrand = MomentIntegrand::new(l, delta, sigma2);
    let axis = |cutoff: f64| -> (Vec<f64>, Vec<f64>) {
        let panels = cutoff.ceil() as usize;
        let width = cutoff / panels as f64;
        let mut nodes = Vec::new();
        for p in 0..panels {
            let a = p as f64 * width;
            nodes.extend(tanh_sinh(a, a + width, step));
        }
        nodes.into_iter().unzip()
    };
    let (n1, w1) = axis(cutoffs[0]);
    let (n2, w2) = axis(cutoffs[1]);
    Ok(integrand.log_tensor_sum(&n1, &w1, &n2, &w2).0.exp())
}

/// Both sides of the kernel expansion at one `(k, β, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Series order used.
    pub terms: usize,
    pub cutoff: f64,
}

impl KernelCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// `cos(2k·arccosh(cosh(β/2) − z))` against its expansion in `Γ(l/2±ik±iw)`.
///
/// The right side is `cos(kβ) + 2k sinh(2πk) ∫₀^W Σ_{l≤L} Γ(l/2±ik±iw)/(2π²Γ(l))
/// (2z)^l/l! cos(wβ) dw`. For `w > k` the integrand decays like `e^{−2π(w−k)}`,
/// which fixes the first cutoff; it grows until the summed integrand at the
/// cutoff is below `abs_tol / 100`. The order `L` doubles until the last term at
/// every node is below `rel_tol` of the absolute series.
pub fn kernel_expansion_check(k: f64, beta: f64, z: f64, spec: &QuadratureSpec) -> Result<KernelCheck> {
    spec.validate()?;
    if !(z.abs() < 0.5) {
        return Err(Error::Precondition(format!("|z| must be below 1/2, got {z}")));
    }
    if !k.is_finite() || !beta.is_finite() {
        return Err(invalid("k and beta must be finite"));
    }
    let k = k.abs();
    let q = arccosh_sq_shifted(2.0 * (0.25 * beta).sinh().powi(2) - z);
    let lhs = if q >= 0.0 {
        (2.0 * k * q.sqrt()).cos()
    } else {
        (2.0 * k * (-q).sqrt()).cosh()
    };
    let base = (k * beta).cos();
    if k == 0.0 || z == 0.0 {
        return Ok(KernelCheck {
            lhs,
            rhs: base,
            terms: 0,
            cutoff: 0.0,
        });
    }
    let prefactor = (2.0 * k).ln() + log_sinh(2.0 * PI * k);
    let log_2z = (2.0 * z.abs()).ln();
    let negative = z < 0.0;
    let rule = GaussLegendre::new(spec.n_nodes);
    let threshold = (spec.abs_tol * 1e-2).ln();
    let mut order = spec.l_max;
    let mut cutoff = (k + (-threshold) / (2.0 * PI) + 2.0).max(spec.w_max);

    let series = |w: f64, order: usize| -> (f64, f64, f64) {
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let mut last = 0.0;
        for l in 1..=order {
            let lf = l as f64;
            let log_term = prefactor + log_gamma_quad(lf, k, w)
                - (2.0 * PI * PI).ln()
                - ln_gamma(lf)
                - ln_factorial(l)
                + lf * log_2z;
            let mut term = log_term.exp();
            if negative && l % 2 == 1 {
                term = -term;
            }
            sum += term;
            abs_sum += term.abs();
            last = term.abs();
        }
        (sum, abs_sum, last)
    };

    for _ in 0..=MAX_ESCALATIONS {
        let edge = series(cutoff, order).1;
        if edge.ln() > threshold {
            cutoff += 4.0;
            continue;
        }
        let (nodes, weights) = axis_nodes(&rule, cutoff);
        let values: Vec<(f64, f64, f64)> = nodes.par_iter().map(|&w| series(w, order)).collect();
        let truncated = values
            .iter()
            .any(|(_, abs_sum, last)| *last > spec.rel_tol * abs_sum.max(1e-300) && *last > 1e-300);
        if truncated {
            order *= 2;
            if order > 1024 {
                break;
            }
            continue;
        }
        let terms: Vec<f64> = values
            .iter()
            .zip(nodes.iter().zip(&weights))
            .map(|((s, _, _), (w, wt))| wt * s * (w * beta).cos())
            .collect();
        let rhs = base + pairwise_sum(&terms);
        return Ok(KernelCheck {
            lhs,
            rhs,
            terms: order,
            cutoff,
        });
    }
    Err(Error::ConvergenceFailure {
        what: format!("kernel expansion at k={k}, beta={beta}, z={z}"),
        diagnostics: format!("order {order}, cutoff {cutoff}"),
    })
}

/// The 5×5×5 test grid `(k, β, z) ∈ [0,2]×[0.2,3]×[−0.4,0.4]`.
pub fn kernel_grid() -> Vec<(f64, f64, f64)> {
    let axis = |lo: f64, hi: f64| (0..5).map(move |i| lo + (hi - lo) * i as f64 / 4.0);
    axis(0.0, 2.0)
        .flat_map(|k| axis(0.2, 3.0).flat_map(move |b| axis(-0.4, 0.4).map(move |z| (k, b, z))))
        .collect()
}

/// An exponential moment of the centred cross-ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpMoment {
    pub z: f64,
    pub value: f64,
    pub log_value: f64,
    /// Magnitude of the last series term kept, relative to the sum.
    pub last_term: f64,
    pub terms: usize,
}

/// Lazily computed moments `M_0 = 𝒵, M_1, M_2, ...` at fixed `(Δ, σ²)`.
pub struct MomentTable {
    delta: f64,
    sigma2: f64,
    spec: QuadratureSpec,
    log_moments: Vec<f64>,
}

impl MomentTable {
    pub fn new(delta: f64, sigma2: f64, spec: QuadratureSpec) -> Result<Self> {
        check_moment_args(1, delta, sigma2)?;
        spec.validate()?;
        Ok(Self {
            delta,
            sigma2,
            spec,
            log_moments: vec![log_partition_closed_form(sigma2)],
        })
    }

    /// `log M_j`.
    pub fn log_moment(&mut self, j: usize) -> Result<f64> {
        while self.log_moments.len() <= j {
            let l = self.log_moments.len() as u32;
            let m = moment_integral(l, self.delta, self.sigma2, &self.spec)?;
            self.log_moments.push(m.log_value);
        }
        Ok(self.log_moments[j])
    }
}

fn check_exp_args(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Precondition(format!("delta must lie in (0,1/2], got {delta}")));
    }
    Ok(())
}

/// `∫ exp{(z√Δ/σ²)(𝒪 − 1/Δ)} d𝕄` from the moment series.
///
/// Summed as `e^{−c/Δ} Σ_j c^j M_j / j!` with `c = z√Δ/σ²`, which is the
/// binomial expansion of `Σ_l c^l/l! E[(𝒪 − 1/Δ)^l]` with the order of
/// summation exchanged. For `z ≥ 0` every term is positive.
pub fn exp_moment_series(z: f64, delta: f64, sigma2: f64, spec: &QuadratureSpec) -> Result<ExpMoment> {
    let mut table = MomentTable::new(delta, sigma2, *spec)?;
    exp_moment_from_table(z, &mut table)
}

/// [`exp_moment_series`] for several `z`, sharing the moment integrals.
pub fn exp_moment_curve(zs: &[f64], delta: f64, sigma2: f64, spec: &QuadratureSpec) -> Result<Vec<ExpMoment>> {
    let mut table = MomentTable::new(delta, sigma2, *spec)?;
    zs.iter().map(|&z| exp_moment_from_table(z, &mut table)).collect()
}

pub fn exp_moment_from_table(z: f64, table: &mut MomentTable) -> Result<ExpMoment> {
    check_exp_args(table.delta)?;
    let log_z0 = table.log_moment(0)?;
    if z == 0.0 {
        return Ok(ExpMoment {
            z,
            value: log_z0.exp(),
            log_value: log_z0,
            last_term: 0.0,
            terms: 1,
        });
    }
    let c = z * table.delta.sqrt() / table.sigma2;
    let log_c = c.abs().ln();
    let mut logs = Vec::new();
    let mut signs = Vec::new();
    let l_cap = table.spec.l_max.max(1);
    let mut last_rel = f64::INFINITY;
    for j in 0..=l_cap {
        let log_term = j as f64 * log_c + table.log_moment(j)? - ln_factorial(j);
        logs.push(log_term);
        signs.push(if c < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 });
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().zip(&signs).map(|(l, s)| s * (l - m).exp()).sum();
        last_rel = (log_term - m).exp() / sum.abs();
        if j >= 2 && last_rel < table.spec.rel_tol {
            let log_value = m + sum.abs().ln() - c / table.delta;
            return Ok(ExpMoment {
                z,
                value: log_value.exp() * sum.signum(),
                log_value,
                last_term: last_rel,
                terms: j + 1,
            });
        }
    }
    Err(Error::ConvergenceFailure {
        what: format!("exponential moment series at z={z}"),
        diagnostics: format!("last term {last_rel:.3e} of the sum after {l_cap} terms"),
    })
}

/// The literal expansion `Σ_l c^l/l! E[(𝒪 − 1/Δ)^l]`, each central moment
/// expanded binomially in the raw moments. Loses digits to cancellation when
/// `1/Δ` is large; kept as an independent route for moderate orders.
pub fn exp_moment_binomial(z: f64, delta: f64, sigma2: f64, order: usize, spec: &QuadratureSpec) -> Result<f64> {
    check_exp_args(delta)?;
    let mut table = MomentTable::new(delta, sigma2, *spec)?;
    let c = z * delta.sqrt() / sigma2;
    let shift = -1.0 / delta;
    let mut moments = Vec::with_capacity(order + 1);
    for j in 0..=order {
        moments.push(table.log_moment(j)?.exp());
    }
    let mut total = 0.0;
    for l in 0..=order {
        let mut central = 0.0;
        for m in 0..=l {
            central += binomial(l, m) * moments[m] * shift.powi((l - m) as i32);
        }
        total += c.powi(l as i32) / ln_factorial(l).exp() * central;
    }
    Ok(total)
}

fn binomial(n: usize, k: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
}
