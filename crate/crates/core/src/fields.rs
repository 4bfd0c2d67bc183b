//! Catalog geometry fields.

use crate::chart::{ChartRegion, MetricField, OneFormField};
use crate::jet::Jet;

pub const EUCLIDEAN_CHART: &str = "euclidean";
pub const STEREOGRAPHIC_CHART: &str = "stereographic";

/// Stereographic chart radius accepted by the sphere fields. The projection
/// pole sits at infinity; points this far out are rejected rather than
/// evaluated in a badly conditioned regime.
pub const STEREOGRAPHIC_RADIUS: f64 = 10.0;

fn radius_squared(x: &[Jet]) -> Jet {
    let mut r2 = Jet::zero(x[0].layout());
    for xi in x {
        r2 = &r2 + &(xi * xi);
    }
    r2
}

/// The flat metric `δ_ij` on `R^n`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    pub n: usize,
}

impl MetricField for Euclidean {
    fn chart_id(&self) -> &str {
        EUCLIDEAN_CHART
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn region(&self) -> ChartRegion {
        ChartRegion::Everywhere
    }
    fn components(&self, x: &[Jet]) -> Vec<Vec<Jet>> {
        let layout = x[0].layout();
        (0..self.n)
            .map(|i| (0..self.n).map(|j| Jet::constant(layout, if i == j { 1.0 } else { 0.0 })).collect())
            .collect()
    }
}

/// Round metric of the sphere `S^n` of the given radius in stereographic
/// coordinates: `a_ij = 4R² δ_ij / (1 + |x|²)²`.
#[derive(Debug, Clone)]
pub struct StereographicSphere {
    pub n: usize,
    pub radius: f64,
}

impl StereographicSphere {
    pub fn unit(n: usize) -> Self {
        Self { n, radius: 1.0 }
    }
}

impl MetricField for StereographicSphere {
    fn chart_id(&self) -> &str {
        STEREOGRAPHIC_CHART
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn region(&self) -> ChartRegion {
        ChartRegion::Ball { radius: STEREOGRAPHIC_RADIUS }
    }
    fn components(&self, x: &[Jet]) -> Vec<Vec<Jet>> {
        let layout = x[0].layout();
        let d = radius_squared(x).add_scalar(1.0);
        let factor = (&d * &d).recip().scale(4.0 * self.radius * self.radius);
        let zero = Jet::zero(layout);
        (0..self.n).map(|i| (0..self.n).map(|j| if i == j { factor.clone() } else { zero.clone() }).collect()).collect()
    }
}

/// A form with constant chart components.
#[derive(Debug, Clone)]
pub struct ConstantForm {
    pub chart: String,
    pub b: Vec<f64>,
}

impl OneFormField for ConstantForm {
    fn chart_id(&self) -> &str {
        &self.chart
    }
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn region(&self) -> ChartRegion {
        ChartRegion::Everywhere
    }
    fn components(&self, x: &[Jet]) -> Vec<Jet> {
        self.b.iter().map(|&v| Jet::constant(x[0].layout(), v)).collect()
    }
}

/// Inverse stereographic map `R³ → S³ ⊂ R⁴ = H`, returned as the quaternion
/// `(w, x, y, z)` with `w = (1 - |x|²)/(1 + |x|²)` and `(x, y, z) = 2x/(1 + |x|²)`.
pub fn stereographic_to_quaternion(x: &[f64]) -> [f64; 4] {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let d = 1.0 + r2;
    [(1.0 - r2) / d, 2.0 * x[0] / d, 2.0 * x[1] / d, 2.0 * x[2] / d]
}

/// `p ↦ p·i` on unit quaternions, a unit Killing field of the round `S³`.
pub fn right_i_field(p: [f64; 4]) -> [f64; 4] {
    let [w, x, y, z] = p;
    [-x, w, z, -y]
}

/// `ε` times the metric dual of the Killing field `p ↦ p·i` on the unit
/// `S³`, pulled back to the stereographic chart:
///
/// `b = ε (2(1 - r²) + 4x₁², 4x₃ + 4x₁x₂, 4x₁x₃ - 4x₂) / (1 + r²)²`.
#[derive(Debug, Clone)]
pub struct HopfForm {
    pub eps: f64,
}

impl HopfForm {
    fn components_jet(&self, x: &[Jet]) -> Vec<Jet> {
        let r2 = radius_squared(x);
        let d = r2.add_scalar(1.0);
        let inv = (&d * &d).recip().scale(self.eps);
        let (x1, x2, x3) = (&x[0], &x[1], &x[2]);
        let c1 = (-&r2).add_scalar(1.0).scale(2.0) + (x1 * x1).scale(4.0);
        let c2 = x3.scale(4.0) + (x1 * x2).scale(4.0);
        let c3 = (x1 * x3).scale(4.0) - x2.scale(4.0);
        vec![&c1 * &inv, &c2 * &inv, &c3 * &inv]
    }
}

impl OneFormField for HopfForm {
    fn chart_id(&self) -> &str {
        STEREOGRAPHIC_CHART
    }
    fn dim(&self) -> usize {
        3
    }
    fn region(&self) -> ChartRegion {
        ChartRegion::Ball { radius: STEREOGRAPHIC_RADIUS }
    }
    fn components(&self, x: &[Jet]) -> Vec<Jet> {
        self.components_jet(x)
    }
}

/// The Hopf form plus the exact, non-Killing term `η x_i dx^i`, which makes
/// `r_ij ≠ 0` and the length of β non-constant.
#[derive(Debug, Clone)]
pub struct PerturbedHopfForm {
    pub eps: f64,
    pub eta: f64,
}

impl OneFormField for PerturbedHopfForm {
    fn chart_id(&self) -> &str {
        STEREOGRAPHIC_CHART
    }
    fn dim(&self) -> usize {
        3
    }
    fn region(&self) -> ChartRegion {
        ChartRegion::Ball { radius: STEREOGRAPHIC_RADIUS }
    }
    fn components(&self, x: &[Jet]) -> Vec<Jet> {
        HopfForm { eps: self.eps }
            .components_jet(x)
            .into_iter()
            .zip(x)
            .map(|(b, xi)| &b + &xi.scale(self.eta))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{eval_metric_jet, eval_oneform_jet, ChartPoint};

    #[test]
    fn euclidean_is_constant() {
        let p = ChartPoint::new(EUCLIDEAN_CHART, vec![0.4, -2.0, 1.0]).unwrap();
        let mj = eval_metric_jet(&Euclidean { n: 3 }, &p, 2).unwrap();
        assert_eq!(mj.a, crate::tensor::Tensor::identity(3));
        assert_eq!(mj.da.max_abs(), 0.0);
        assert_eq!(mj.dda.max_abs(), 0.0);
    }

    #[test]
    fn sphere_at_origin() {
        let p = ChartPoint::new(STEREOGRAPHIC_CHART, vec![0.0; 3]).unwrap();
        let mj = eval_metric_jet(&StereographicSphere::unit(3), &p, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(mj.a[[i, j]], if i == j { 4.0 } else { 0.0 });
            }
        }
        assert!(mj.da.max_abs() < 1e-15);
        // ∂_k∂_l (4/(1+r²)²) at 0 = -16 δ_kl
        assert!((mj.dda[[0, 0, 1, 1]] + 16.0).abs() < 1e-12);
    }

    #[test]
    fn outside_chart_is_rejected() {
        let p = ChartPoint::new(STEREOGRAPHIC_CHART, vec![20.0, 0.0, 0.0]).unwrap();
        assert!(eval_metric_jet(&StereographicSphere::unit(3), &p, 1).is_err());
        let q = ChartPoint::new(EUCLIDEAN_CHART, vec![0.0; 3]).unwrap();
        assert!(eval_oneform_jet(&HopfForm { eps: 0.3 }, &q, 1).is_err());
    }

    #[test]
    fn hopf_matches_embedding_pullback() {
        // b_i = ε <V(p(x)), ∂_i p(x)> with ∂_i p by central differences.
        let form = HopfForm { eps: 0.3 };
        let x = [0.2, -0.35, 0.5];
        let p = ChartPoint::new(STEREOGRAPHIC_CHART, x.to_vec()).unwrap();
        let oj = eval_oneform_jet(&form, &p, 0).unwrap();
        let v = right_i_field(stereographic_to_quaternion(&x));
        let h = 1e-6;
        for i in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            let (pp, pm) = (stereographic_to_quaternion(&xp), stereographic_to_quaternion(&xm));
            let dp: f64 = (0..4).map(|a| v[a] * (pp[a] - pm[a]) / (2.0 * h)).sum();
            assert!((0.3 * dp - oj.b[i]).abs() < 1e-9, "component {i}");
        }
    }

    #[test]
    fn killing_field_is_tangent_and_unit() {
        let p = stereographic_to_quaternion(&[0.7, 0.1, -1.2]);
        let v = right_i_field(p);
        let dot: f64 = (0..4).map(|a| p[a] * v[a]).sum();
        let norm: f64 = v.iter().map(|c| c * c).sum();
        assert!(dot.abs() < 1e-15);
        assert!((norm - 1.0).abs() < 1e-15);
    }
}
