//! PSL(2,ℝ) acting on the circle through the `tan(π·)` chart.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diffeo::{wrap_unit, GridDiffeo};
use crate::error::{invalid, Error, Result};

/// A unit-determinant matrix `[[a, b], [c, d]]` acting by
/// `tan(πψ(t)) = (a·tan(πt) + b) / (c·tan(πt) + d)`.
///
/// Points are handled as the vectors `(sin πt, cos πt)`, so the chart pole
/// at `t = 1/2` never appears: `πψ` is the angle of `(c·sin + d·cos, a·sin + b·cos)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MobiusMap {
    /// Rescales to determinant one and fixes the sign so that `a > 0`, or
    /// `a = 0` and `b ≥ 0`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(invalid("non-finite Möbius coefficient"));
        }
        let det = a * d - b * c;
        if !(det > 0.0) {
            return Err(invalid(format!("determinant must be positive, got {det}")));
        }
        let s = det.sqrt().recip();
        let (mut a, mut b, mut c, mut d) = (a * s, b * s, c * s, d * s);
        if a < 0.0 || (a == 0.0 && b < 0.0) {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Rotation of the circle by `angle` (circle units).
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = (PI * angle).sin_cos();
        Self::new(c, s, -s, c).expect("rotation matrices have unit determinant")
    }

    /// `R(θ₁)·diag(e^r, e^{-r})·R(θ₂)`: every element of PSL(2,ℝ) has this form.
    pub fn from_cartan(theta1: f64, stretch: f64, theta2: f64) -> Self {
        let dilation = Self::new(stretch.exp(), 0.0, 0.0, (-stretch).exp()).expect("positive diagonal");
        Self::rotation(theta1).compose(&dilation).compose(&Self::rotation(theta2))
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Matrix product `self · other`: apply `other` first.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (e, f, g, h) = (other.a, other.b, other.c, other.d);
        Self::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
            .expect("product of unit-determinant matrices")
    }

    pub fn inverse(&self) -> MobiusMap {
        Self::new(self.d, -self.b, -self.c, self.a).expect("inverse has unit determinant")
    }

    fn image(&self, t: f64) -> (f64, f64) {
        let (s, c) = (PI * t).sin_cos();
        (self.c * s + self.d * c, self.a * s + self.b * c)
    }

    /// The lifted map `ψ: ℝ → ℝ`, increasing, with `ψ(t+1) = ψ(t) + 1` and
    /// `ψ(0) ∈ [0, 1)`.
    pub fn apply(&self, t: f64) -> f64 {
        let k = t.floor();
        let r = t - k;
        let base = wrap_unit(self.b.atan2(self.d) / PI);
        if r == 0.0 {
            return base + k;
        }
        let w0 = (self.d, self.b);
        let w = self.image(r);
        let mut angle = (w0.0 * w.1 - w0.1 * w.0).atan2(w0.0 * w.0 + w0.1 * w.1);
        if angle < -0.5 * PI {
            angle += 2.0 * PI;
        }
        base + k + angle / PI
    }

    /// `ψ(t)` reduced to `[0, 1)`.
    pub fn apply_circle(&self, t: f64) -> f64 {
        wrap_unit(self.apply(t))
    }

    /// `ψ′(t) = 1 / |M·(sin πt, cos πt)|²`.
    pub fn derivative(&self, t: f64) -> f64 {
        let (x, y) = self.image(t);
        1.0 / (x * x + y * y)
    }

    pub fn log_derivative(&self, t: f64) -> f64 {
        let (x, y) = self.image(t);
        -(x * x + y * y).ln()
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let (s, c) = (PI * t).sin_cos();
        let (x, y) = (self.c * s + self.d * c, self.a * s + self.b * c);
        let dx = PI * (self.c * c - self.d * s);
        let dy = PI * (self.a * c - self.b * s);
        let r2 = x * x + y * y;
        -2.0 * (x * dx + y * dy) / (r2 * r2)
    }
}

/// Grid representation of `ψ ∘ φ`.
///
/// `log(ψ∘φ)′ = log ψ′(φ) + log φ′` at each node, renormalized to vanish at 0.
pub fn mobius_post_compose(m: &MobiusMap, diffeo: &GridDiffeo) -> GridDiffeo {
    if m.is_identity() {
        return diffeo.clone();
    }
    let base = m.log_derivative(diffeo.node_phi(0));
    let mut xi: Vec<f64> = (0..=diffeo.n())
        .map(|i| m.log_derivative(diffeo.node_phi(i)) + diffeo.xi()[i] - base)
        .collect();
    xi[0] = 0.0;
    let theta = m.apply_circle(diffeo.theta());
    GridDiffeo::new(xi, theta).expect("post-composition of a valid diffeomorphism")
}

/// Grid representation of a Möbius map itself.
pub fn mobius_diffeo(m: &MobiusMap, n: usize) -> GridDiffeo {
    mobius_post_compose(m, &GridDiffeo::identity(n))
}

const GAUGE_POINTS: [f64; 3] = [0.0, 1.0 / 3.0, 2.0 / 3.0];
const GAUGE_TOL: f64 = 1e-13;
const GAUGE_REFINEMENTS: usize = 6;

fn projective(t: f64) -> [f64; 2] {
    let (s, c) = (PI * t).sin_cos();
    [s, c]
}

fn det2(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Columns `β₁u₁, β₂u₂` with `β₁u₁ + β₂u₂ = u₃`.
fn frame(points: [f64; 3]) -> Result<[[f64; 2]; 2]> {
    let u: Vec<[f64; 2]> = points.iter().map(|&p| projective(p)).collect();
    let det = det2(u[0], u[1]);
    let scale = 1e-12;
    if det.abs() < scale || det2(u[0], u[2]).abs() < scale || det2(u[1], u[2]).abs() < scale {
        return Err(Error::IllConditionedGauge(format!(
            "image points {points:?} nearly coincide"
        )));
    }
    let b1 = det2(u[2], u[1]) / det;
    let b2 = det2(u[0], u[2]) / det;
    Ok([[b1 * u[0][0], b2 * u[1][0]], [b1 * u[0][1], b2 * u[1][1]]])
}

/// `R(θ₁)·diag(e^r, e^{−r})·R(θ₂)` with uniform angles and `r` uniform on `[0, max_stretch]`.
pub fn random_mobius<R: Rng + ?Sized>(rng: &mut R, max_stretch: f64) -> MobiusMap {
    let (t1, t2): (f64, f64) = (rng.random(), rng.random());
    MobiusMap::from_cartan(t1, max_stretch * rng.random::<f64>(), t2)
}

/// The Möbius map sending the circle points `from[j]` to `to[j]`.
pub fn three_point_map(from: [f64; 3], to: [f64; 3]) -> Result<MobiusMap> {
    let src = frame(from)?;
    let dst = frame(to)?;
    let det = src[0][0] * src[1][1] - src[0][1] * src[1][0];
    let inv = [
        [src[1][1] / det, -src[0][1] / det],
        [-src[1][0] / det, src[0][0] / det],
    ];
    let m = |i: usize, j: usize| dst[i][0] * inv[0][j] + dst[i][1] * inv[1][j];
    let (a, b, c, d) = (m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    if !(a * d - b * c > 0.0) {
        return Err(Error::IllConditionedGauge(
            "point triples have opposite orientation".into(),
        ));
    }
    MobiusMap::new(a, b, c, d).map_err(|e| Error::IllConditionedGauge(e.to_string()))
}

fn gauge_defect(d: &GridDiffeo) -> f64 {
    GAUGE_POINTS
        .iter()
        .map(|&p| crate::diffeo::circle_dist(d.phi(p), p))
        .fold(0.0, f64::max)
}

/// Moves `φ` into the slice `φ(0) = 0, φ(1/3) = 1/3, φ(2/3) = 2/3`.
///
/// The map is the closed-form three-point solution; since the grid
/// representation of `m∘φ` is re-integrated, the solve is repeated on the
/// result until the slice conditions hold to `1e-13`.
pub fn gauge_fix(diffeo: &GridDiffeo) -> Result<(MobiusMap, GridDiffeo)> {
    let mut total = MobiusMap::identity();
    let mut current = diffeo.clone();
    for _ in 0..GAUGE_REFINEMENTS {
        if gauge_defect(&current) <= GAUGE_TOL {
            break;
        }
        let images = GAUGE_POINTS.map(|p| current.phi(p));
        let step = three_point_map(images, GAUGE_POINTS)?;
        current = mobius_post_compose(&step, &current);
        total = step.compose(&total);
    }
    Ok((total, current))
}

/// The three PSL(2,ℝ) tangent directions at `φ` in `ξ` coordinates.
///
/// Rotation contributes nothing to `ξ`; the two remaining generators give
/// `sin 2πφ − sin 2πφ(0)` and `cos 2πφ − cos 2πφ(0)`. The third vector is
/// zero and returned for completeness.
pub fn tangent_directions(diffeo: &GridDiffeo) -> [Vec<f64>; 3] {
    let n = diffeo.n();
    let p0 = diffeo.node_phi(0);
    let sin: Vec<f64> = (0..=n)
        .map(|i| (2.0 * PI * diffeo.node_phi(i)).sin() - (2.0 * PI * p0).sin())
        .collect();
    let cos: Vec<f64> = (0..=n)
        .map(|i| (2.0 * PI * diffeo.node_phi(i)).cos() - (2.0 * PI * p0).cos())
        .collect();
    [sin, cos, vec![0.0; n + 1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_fixes_points() {
        let m = MobiusMap::identity();
        for t in [0.0, 0.1, 0.5, 0.77, 1.3, -0.4] {
            assert!((m.apply(t) - t).abs() < 1e-15);
        }
    }

    #[test]
    fn sign_normalization() {
        let m = MobiusMap::new(-2.0, -1.0, -1.0, -1.0).unwrap();
        assert_eq!(m.coefficients(), [2.0, 1.0, 1.0, 1.0]);
        assert!(MobiusMap::new(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn chart_formula_away_from_pole() {
        let m = MobiusMap::new(1.3, 0.4, -0.2, 0.7).unwrap();
        let [a, b, c, d] = m.coefficients();
        for t in [0.05, 0.2, 0.31, 0.6, 0.9] {
            let x = (PI * t).tan();
            let expected = (a * x + b) / (c * x + d);
            assert!(((PI * m.apply(t)).tan() - expected).abs() < 1e-11 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn continuous_through_the_pole() {
        let m = MobiusMap::new(2.0, 0.5, 1.0, 0.75).unwrap();
        let below = m.apply(0.5 - 1e-12);
        let at = m.apply(0.5);
        let above = m.apply(0.5 + 1e-12);
        assert!(below < at && at < above && above - below < 1e-9);
    }

    #[test]
    fn second_derivative_matches_differences() {
        let m = MobiusMap::from_cartan(0.2, 0.6, 0.7);
        let h = 1e-5;
        for t in [0.1, 0.45, 0.8] {
            let fd = (m.derivative(t + h) - m.derivative(t - h)) / (2.0 * h);
            assert!((fd - m.second_derivative(t)).abs() < 1e-6 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn three_point_map_hits_targets() {
        let from = [0.1, 0.3, 0.85];
        let to = [0.0, 1.0 / 3.0, 2.0 / 3.0];
        let m = three_point_map(from, to).unwrap();
        for (f, t) in from.iter().zip(&to) {
            assert!(crate::diffeo::circle_dist(m.apply(*f), *t) < 1e-14);
        }
        assert!(matches!(
            three_point_map([0.1, 0.1, 0.5], to),
            Err(Error::IllConditionedGauge(_))
        ));
        assert!(matches!(
            three_point_map([0.85, 0.3, 0.1], to),
            Err(Error::IllConditionedGauge(_))
        ));
    }

    #[test]
    fn rotation_gauges_to_identity() {
        let d = GridDiffeo::rotation(256, 0.1).unwrap();
        let (m, fixed) = gauge_fix(&d).unwrap();
        assert!(fixed.xi().iter().all(|v| v.abs() < 1e-12));
        assert!(fixed.theta() < 1e-12 || fixed.theta() > 1.0 - 1e-12);
        assert!((m.apply(0.1) - 0.0).abs() < 1e-12 || (m.apply(0.1) - 1.0).abs() < 1e-12);
    }
}
