//! Points, directions and field jets on a single coordinate chart.
//!
//! Geometry fields (`a_ij(x)`, `b_i(x)`) are written once against [`Jet`]
//! arithmetic; evaluating them on seeded coordinate jets yields values and
//! exact partial derivatives. Finite differences live in [`fd_oracle`] and are
//! only used to cross-check.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::jet::{Jet, Layout};
use crate::tensor::{cholesky, raise_lower, spd_inverse, Slot, Tensor};

/// Highest x-derivative order a field jet can carry.
pub const MAX_FIELD_ORDER: usize = 2;

/// Validity region of a chart.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartRegion {
    Everywhere,
    /// Open ball `|x| < radius`.
    Ball { radius: f64 },
}

impl ChartRegion {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ChartRegion::Everywhere => true,
            ChartRegion::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>().sqrt() < *radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
    pub chart_id: String,
}

impl ChartPoint {
    pub fn new(chart_id: impl Into<String>, coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::Dimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(coords));
        }
        Ok(Self { coords, chart_id: chart_id.into() })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub components: Vec<f64>,
    pub base: ChartPoint,
}

impl TangentVector {
    pub fn new(base: ChartPoint, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.dim() {
            return Err(Error::Shape { expected: base.dim(), got: components.len() });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(components));
        }
        if components.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(Self { components, base })
    }
}

/// A Riemannian metric `a_ij(x)` on a chart.
pub trait MetricField: Debug + Send + Sync {
    fn chart_id(&self) -> &str;
    fn dim(&self) -> usize;
    fn region(&self) -> ChartRegion;
    /// The components `a_ij` evaluated on coordinate jets.
    fn components(&self, x: &[Jet]) -> Vec<Vec<Jet>>;
}

/// A 1-form `b_i(x)` on a chart.
pub trait OneFormField: Debug + Send + Sync {
    fn chart_id(&self) -> &str;
    fn dim(&self) -> usize;
    fn region(&self) -> ChartRegion;
    fn components(&self, x: &[Jet]) -> Vec<Jet>;
}

/// Values and x-derivatives of `a_ij` at a point.
///
/// `da[[i, j, k]] = ∂_k a_ij`, `dda[[i, j, k, l]] = ∂_l ∂_k a_ij`. Derivative
/// tensors above `order` are zero.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub order: usize,
    pub a: Tensor,
    pub da: Tensor,
    pub dda: Tensor,
    pub a_inv: Tensor,
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn raise_lower(&self, t: &Tensor, slots: &[Slot]) -> Result<Tensor> {
        raise_lower(t, &self.a, &self.a_inv, slots)
    }

    pub fn raise_vec(&self, v: &[f64]) -> Vec<f64> {
        self.a_inv.mat_vec(v)
    }

    pub fn lower_vec(&self, v: &[f64]) -> Vec<f64> {
        self.a.mat_vec(v)
    }

    /// `α(y) = sqrt(a_ij y^i y^j)`.
    pub fn norm(&self, y: &[f64]) -> f64 {
        self.a.bilinear(y, y).sqrt()
    }
}

/// Values and x-derivatives of `b_i` at a point: `db[[i, j]] = ∂_j b_i`,
/// `ddb[[i, j, k]] = ∂_k ∂_j b_i`.
#[derive(Debug, Clone)]
pub struct OneFormJet {
    pub order: usize,
    pub b: Vec<f64>,
    pub db: Tensor,
    pub ddb: Tensor,
}

impl OneFormJet {
    /// `b = ‖β‖_α`.
    pub fn norm(&self, metric: &MetricJet) -> f64 {
        metric.a_inv.bilinear(&self.b, &self.b).sqrt()
    }
}

fn seeded_coordinates(x: &[f64], order: usize) -> Vec<Jet> {
    let layout = Layout::new(x.len(), order);
    x.iter().enumerate().map(|(i, &v)| Jet::variable(&layout, i, v)).collect()
}

fn check_point(chart: &str, region: &ChartRegion, dim: usize, point: &ChartPoint, order: usize) -> Result<()> {
    if order > MAX_FIELD_ORDER {
        return Err(Error::JetOrder { requested: order, max: MAX_FIELD_ORDER });
    }
    if point.dim() != dim {
        return Err(Error::Shape { expected: dim, got: point.dim() });
    }
    if point.chart_id != chart || !region.contains(&point.coords) {
        return Err(Error::OutsideChart { chart: chart.to_string(), coords: point.coords.clone() });
    }
    Ok(())
}

fn partial_tensor<'a>(n: usize, rank: usize, get: impl Fn(&[usize]) -> &'a Jet, order: usize) -> Tensor {
    // The first `rank` slots index components, the rest are derivative slots.
    Tensor::from_fn(n, rank + order, |idx| {
        let (comp, vars) = idx.split_at(rank);
        get(comp).partial_vars(vars)
    })
}

pub fn eval_metric_jet(field: &dyn MetricField, point: &ChartPoint, order: usize) -> Result<MetricJet> {
    let n = field.dim();
    check_point(field.chart_id(), &field.region(), n, point, order)?;
    let x = seeded_coordinates(&point.coords, order);
    let comps = field.components(&x);
    let a = partial_tensor(n, 2, |c| &comps[c[0]][c[1]], 0);
    let da = if order >= 1 { partial_tensor(n, 2, |c| &comps[c[0]][c[1]], 1) } else { Tensor::zeros(n, 3) };
    let dda = if order >= 2 { partial_tensor(n, 2, |c| &comps[c[0]][c[1]], 2) } else { Tensor::zeros(n, 4) };
    if cholesky(&a).is_none() {
        return Err(Error::NotPositiveDefinite { context: format!("a_ij at {:?}", point.coords) });
    }
    let a_inv = spd_inverse(&a).expect("Cholesky succeeded");
    Ok(MetricJet { order, a, da, dda, a_inv })
}

pub fn eval_oneform_jet(field: &dyn OneFormField, point: &ChartPoint, order: usize) -> Result<OneFormJet> {
    let n = field.dim();
    check_point(field.chart_id(), &field.region(), n, point, order)?;
    let x = seeded_coordinates(&point.coords, order);
    let comps = field.components(&x);
    let b = comps.iter().map(Jet::value).collect();
    let db = if order >= 1 { partial_tensor(n, 1, |c| &comps[c[0]], 1) } else { Tensor::zeros(n, 2) };
    let ddb = if order >= 2 { partial_tensor(n, 1, |c| &comps[c[0]], 2) } else { Tensor::zeros(n, 3) };
    Ok(OneFormJet { order, b, db, ddb })
}

/// Plain values `a_ij(x)`, convenient as a finite-difference sampler.
pub fn metric_values(field: &dyn MetricField, x: &[f64]) -> Tensor {
    let comps = field.components(&seeded_coordinates(x, 0));
    Tensor::from_fn(x.len(), 2, |i| comps[i[0]][i[1]].value())
}

pub fn oneform_values(field: &dyn OneFormField, x: &[f64]) -> Vec<f64> {
    field.components(&seeded_coordinates(x, 0)).iter().map(Jet::value).collect()
}

/// Default central-difference step `1e-5·max(1, |x|)` for first derivatives.
/// Higher orders scale the base step by `10^(order-1)` to balance truncation
/// against cancellation.
pub fn default_fd_step(x: &[f64], order: usize) -> f64 {
    let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    1e-5 * scale * 10f64.powi(order.saturating_sub(1) as i32)
}

/// 1-D central stencils `(offset, weight)` for derivative orders 0..=3,
/// all second-order accurate.
fn stencil(order: usize) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => unreachable!("order checked by caller"),
    }
}

fn central_difference(f: &dyn Fn(&[f64]) -> f64, point: &[f64], multi_index: &[usize], step: f64) -> f64 {
    let axes: Vec<(usize, &[(i32, f64)])> =
        multi_index.iter().enumerate().filter(|(_, &m)| m > 0).map(|(v, &m)| (v, stencil(m))).collect();
    let total: usize = multi_index.iter().sum();
    let mut acc = 0.0;
    let mut counters = vec![0usize; axes.len()];
    let mut x = point.to_vec();
    loop {
        x.copy_from_slice(point);
        let mut w = 1.0;
        for (slot, (v, st)) in axes.iter().enumerate() {
            let (off, weight) = st[counters[slot]];
            x[*v] += off as f64 * step;
            w *= weight;
        }
        acc += w * f(&x);
        // odometer over the stencil product
        let mut slot = 0;
        loop {
            if slot == axes.len() {
                return acc / step.powi(total as i32);
            }
            counters[slot] += 1;
            if counters[slot] < axes[slot].1.len() {
                break;
            }
            counters[slot] = 0;
            slot += 1;
        }
    }
}

/// Central-difference estimate of `∂^m f(point)` with `m = multi_index`
/// (exponent per variable, total order at most 3). Third-order requests are
/// Richardson-refined from steps `h` and `h/2`.
pub fn fd_oracle(f: &dyn Fn(&[f64]) -> f64, point: &[f64], multi_index: &[usize], step: f64) -> Result<f64> {
    if multi_index.len() != point.len() {
        return Err(Error::Shape { expected: point.len(), got: multi_index.len() });
    }
    let total: usize = multi_index.iter().sum();
    if total > 3 || multi_index.iter().any(|&m| m > 3) {
        return Err(Error::MultiIndexOrder(total));
    }
    if !(step >= 1e-10) {
        return Err(Error::StepUnderflow(step));
    }
    if total == 0 {
        return Ok(f(point));
    }
    let coarse = central_difference(f, point, multi_index, step);
    if total < 3 {
        return Ok(coarse);
    }
    let fine = central_difference(f, point, multi_index, step / 2.0);
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_polynomials() {
        let sq = |x: &[f64]| x[0] * x[0];
        let d1 = fd_oracle(&sq, &[1.0, 0.0, 0.0], &[1, 0, 0], 1e-4).unwrap();
        assert!((d1 - 2.0).abs() < 1e-7);
        for x0 in [-3.0, 0.0, 0.4, 7.0] {
            let d2 = fd_oracle(&sq, &[x0, 1.0, 1.0], &[2, 0, 0], 1e-3).unwrap();
            assert!((d2 - 2.0).abs() < 1e-6, "{d2}");
        }
    }

    #[test]
    fn fd_constant_has_zero_derivatives() {
        let c = |_: &[f64]| 3.25;
        let p = [0.3, -0.2, 0.9];
        for mi in [[1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 2], [1, 1, 1], [3, 0, 0], [0, 2, 1]] {
            let d = fd_oracle(&c, &p, &mi, 1e-3).unwrap();
            assert!(d.abs() < 1e-9, "{mi:?}: {d}");
        }
    }

    #[test]
    fn fd_mixed_third_order() {
        let f = |x: &[f64]| (x[0] * x[1]).sin() + x[2].powi(3);
        let p = [0.3, 0.7, -0.4];
        // ∂x²∂y sin(xy) = -2y sin(xy) - x y² cos(xy)
        let (x, y): (f64, f64) = (p[0], p[1]);
        let expect = -2.0 * y * (x * y).sin() - x * y * y * (x * y).cos();
        let d = fd_oracle(&f, &p, &[2, 1, 0], 1e-3).unwrap();
        assert!((d - expect).abs() < 1e-6, "{d} vs {expect}");
        let d = fd_oracle(&f, &p, &[0, 0, 3], 1e-3).unwrap();
        assert!((d - 6.0).abs() < 1e-6);
    }

    #[test]
    fn fd_rejects_bad_requests() {
        let f = |x: &[f64]| x[0];
        assert!(matches!(fd_oracle(&f, &[0.0, 0.0, 0.0], &[1, 0, 0], 1e-11), Err(Error::StepUnderflow(_))));
        assert!(matches!(fd_oracle(&f, &[0.0, 0.0, 0.0], &[2, 2, 0], 1e-3), Err(Error::MultiIndexOrder(4))));
    }

    #[test]
    fn tangent_vector_validation() {
        let p = ChartPoint::new("r3", vec![0.0; 3]).unwrap();
        assert_eq!(TangentVector::new(p.clone(), vec![0.0; 3]), Err(Error::ZeroDirection));
        assert!(matches!(TangentVector::new(p, vec![1.0; 2]), Err(Error::Shape { .. })));
        assert_eq!(ChartPoint::new("r2", vec![0.0; 2]), Err(Error::Dimension(2)));
    }

    #[test]
    fn default_step_grows_with_order() {
        let h1 = default_fd_step(&[0.1, 0.0, 0.0], 1);
        assert_eq!(h1, 1e-5);
        assert!(default_fd_step(&[3.0, 4.0, 0.0], 1) > 4.9e-5);
        assert!(default_fd_step(&[0.0; 3], 2) > h1);
    }
}
