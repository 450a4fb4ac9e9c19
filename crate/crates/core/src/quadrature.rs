//! Quadrature rules and reductions with a fixed summation order.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule on `[a, b]` split into `panels` equal panels.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + 0.5 * width * x, 0.5 * width * w));
            }
        }
        out
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh-sinh (double exponential) nodes on `[a, b]` with step `h`.
///
/// Abscissae closer to the endpoints than the f64 resolution are dropped.
pub fn tanh_sinh(a: f64, b: f64, h: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mut out = Vec::new();
    let kmax = (4.0 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let gap = 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        let ch = u.cosh();
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        if w < 1e-300 || gap == 0.0 {
            continue;
        }
        let x = if u < 0.0 { a + half * gap } else { b - half * gap };
        out.push((x, half * h * w));
    }
    out
}

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `log(sum(exp(v)))` with max shift; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let shifted: Vec<f64> = values.iter().map(|v| (v - m).exp()).collect();
    m + pairwise_sum(&shifted).ln()
}

/// Log-space quadrature: `log(sum(w_i * exp(l_i)))` for positive weights.
pub fn log_weighted_sum(log_values: &[f64], weights: &[f64]) -> f64 {
    let m = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let terms: Vec<f64> = log_values
        .iter()
        .zip(weights)
        .map(|(l, w)| w * (l - m).exp())
        .collect();
    m + pairwise_sum(&terms).ln()
}

/// `log(sinh(x))` for `x > 0`, stable for large arguments.
pub fn log_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x18: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(18))
            .sum();
        assert!((x18 - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn composite_gauss_on_exponential() {
        let rule = GaussLegendre::new(16);
        let s: f64 = rule
            .composite(0.0, 3.0, 4)
            .iter()
            .map(|(x, w)| w * x.exp())
            .sum();
        assert!((s - (3f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let s: f64 = tanh_sinh(0.0, 1.0, 1.0 / 64.0)
            .iter()
            .map(|(x, w)| w / x.sqrt())
            .sum();
        assert!((s - 2.0).abs() < 1e-10, "{s}");
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let v = [1.0, 2.0, 3.0];
        let direct = v.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sinh_is_continuous_at_switch() {
        let a = log_sinh(20.0 - 1e-12);
        let b = log_sinh(20.0 + 1e-12);
        assert!((a - b).abs() < 1e-11);
        assert!((log_sinh(1.0) - 1f64.sinh().ln()).abs() < 1e-15);
    }
}
