//! Riemannian geometry of α: Levi-Civita connection, curvature, and the
//! covariant derivatives of β with their `r`/`s`/`t` decomposition.
//!
//! Curvature convention. `riem[[i, j, k, l]] = R^i_{jkl}` with
//!
//! ```text
//! R^i_{jkl} = ∂_k Γ^i_{lj} - ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} - Γ^i_{lm} Γ^m_{kj},
//! ```
//!
//! so that `R(∂_k, ∂_l) ∂_j = R^i_{jkl} ∂_i` and `Ric_{jl} = R^i_{jil}`. The
//! lowered array is `riem_low[[i, m, j, k]] = a_{mq} R^q_{ijk}`, chosen so
//! that the Ricci identity for a 1-form reads
//!
//! ```text
//! b_{i|j|k} - b_{i|k|j} = b^m riem_low[[i, m, j, k]],
//! ```
//!
//! where `b_{i|j|k}` differentiates first in `j`, then in `k`. The unit
//! tests pin this numerically.

use crate::chart::{MetricJet, OneFormJet, TangentVector};
use crate::error::{Error, Result};
use crate::tensor::{dot, Tensor};

/// `gamma[[i, j, k]] = Γ^i_{jk}`, `dgamma[[i, j, k, l]] = ∂_l Γ^i_{jk}`.
#[derive(Debug, Clone)]
pub struct ChristoffelData {
    pub gamma: Tensor,
    pub dgamma: Tensor,
}

impl ChristoffelData {
    /// Spray of α, `ᵅG^i = ½ Γ^i_{jk} y^j y^k`.
    pub fn spray(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        acc += self.gamma[[i, j, k]] * y[j] * y[k];
                    }
                }
                0.5 * acc
            })
            .collect()
    }
}

pub fn christoffel(mj: &MetricJet) -> Result<ChristoffelData> {
    if mj.order < 2 {
        return Err(Error::JetOrder { requested: 2, max: mj.order });
    }
    let n = mj.dim();
    let (da, dda, inv) = (&mj.da, &mj.dda, &mj.a_inv);

    // Γ_{ljk} = ½(∂_j a_lk + ∂_k a_lj - ∂_l a_jk)
    let first = Tensor::from_fn(n, 3, |i| {
        let (l, j, k) = (i[0], i[1], i[2]);
        0.5 * (da[[l, k, j]] + da[[l, j, k]] - da[[j, k, l]])
    });
    let dfirst = Tensor::from_fn(n, 4, |i| {
        let (l, j, k, m) = (i[0], i[1], i[2], i[3]);
        0.5 * (dda[[l, k, j, m]] + dda[[l, j, k, m]] - dda[[j, k, l, m]])
    });
    // ∂_m a^{il} = -a^{ip} ∂_m a_pq a^{ql}
    let dinv = Tensor::from_fn(n, 3, |i| {
        let (a, l, m) = (i[0], i[1], i[2]);
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                acc -= inv[[a, p]] * da[[p, q, m]] * inv[[q, l]];
            }
        }
        acc
    });

    let gamma = Tensor::from_fn(n, 3, |idx| (0..n).map(|l| inv[[idx[0], l]] * first[[l, idx[1], idx[2]]]).sum());
    let dgamma = Tensor::from_fn(n, 4, |idx| {
        let (i, j, k, m) = (idx[0], idx[1], idx[2], idx[3]);
        (0..n).map(|l| dinv[[i, l, m]] * first[[l, j, k]] + inv[[i, l]] * dfirst[[l, j, k, m]]).sum()
    });
    Ok(ChristoffelData { gamma, dgamma })
}

#[derive(Debug, Clone)]
pub struct AlphaCurvature {
    /// `R^i_{jkl}`
    pub riem: Tensor,
    /// `a_{mq} R^q_{ijk}` stored at `[[i, m, j, k]]`
    pub riem_low: Tensor,
    /// `ᵅRic_{jl}`
    pub ric: Tensor,
}

impl AlphaCurvature {
    /// `ᵅRic(y) = ᵅRic_{ij} y^i y^j`.
    pub fn ric_quadratic(&self, y: &[f64]) -> f64 {
        self.ric.bilinear(y, y)
    }

    /// `ᵅR^i_k = R^i_{jkl} y^j y^l`, the Riemann curvature of α in direction y.
    pub fn riemann_in_direction(&self, y: &[f64]) -> Tensor {
        let n = y.len();
        Tensor::from_fn(n, 2, |idx| {
            let (i, k) = (idx[0], idx[1]);
            let mut acc = 0.0;
            for j in 0..n {
                for l in 0..n {
                    acc += self.riem[[i, j, k, l]] * y[j] * y[l];
                }
            }
            acc
        })
    }

    /// Largest component of `R^i_{jkl} + R^i_{klj} + R^i_{ljk}`.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.riem.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.riem[[i, j, k, l]] + self.riem[[i, k, l, j]] + self.riem[[i, l, j, k]];
                        worst = worst.max(r.abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn alpha_curvature(mj: &MetricJet, chr: &ChristoffelData) -> Result<AlphaCurvature> {
    if mj.order < 2 {
        return Err(Error::JetOrder { requested: 2, max: mj.order });
    }
    let n = mj.dim();
    let (g, dg) = (&chr.gamma, &chr.dgamma);
    let riem = Tensor::from_fn(n, 4, |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        let mut r = dg[[i, l, j, k]] - dg[[i, k, j, l]];
        for m in 0..n {
            r += g[[i, k, m]] * g[[m, l, j]] - g[[i, l, m]] * g[[m, k, j]];
        }
        r
    });
    let riem_low = Tensor::from_fn(n, 4, |idx| {
        let (i, m, j, k) = (idx[0], idx[1], idx[2], idx[3]);
        (0..n).map(|q| mj.a[[m, q]] * riem[[q, i, j, k]]).sum()
    });
    let ric = Tensor::from_fn(n, 2, |idx| (0..n).map(|i| riem[[i, idx[0], i, idx[1]]]).sum());
    Ok(AlphaCurvature { riem, riem_low, ric })
}

/// Covariant derivative data of β at a point, together with its contractions
/// against a direction `y`.
#[derive(Debug, Clone)]
pub struct BetaInvariants {
    /// `b_{i|j}`
    pub b_cov: Tensor,
    pub r: Tensor,
    pub s: Tensor,
    /// `s^i_j = a^{ik} s_{kj}`
    pub s_up: Tensor,
    /// `r_j = b^i r_ij`
    pub r_vec: Vec<f64>,
    /// `s_j = b^i s_ij`
    pub s_vec: Vec<f64>,
    /// `t_ij = s_im s^m_j`
    pub t: Tensor,
    /// `t^m_m`
    pub t_trace: f64,
    pub b_low: Vec<f64>,
    pub b_up: Vec<f64>,
    pub b2: f64,
    pub y: Vec<f64>,
    /// `y_i = a_ij y^j`
    pub y_low: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub r00: f64,
    /// `s_0 = s_j y^j`
    pub s0: f64,
    /// `s^i_0 = s^i_j y^j`
    pub s_i0: Vec<f64>,
    /// `s_{i0} = s_ij y^j`
    pub s_low_i0: Vec<f64>,
    pub t00: f64,
}

impl BetaInvariants {
    /// `β/α`
    pub fn ratio(&self) -> f64 {
        self.beta / self.alpha
    }
}

fn covariant_first(oj: &OneFormJet, chr: &ChristoffelData, n: usize) -> Tensor {
    // b_{i|j} = ∂_j b_i - Γ^m_ij b_m
    Tensor::from_fn(n, 2, |idx| {
        let (i, j) = (idx[0], idx[1]);
        oj.db[[i, j]] - (0..n).map(|m| chr.gamma[[m, i, j]] * oj.b[m]).sum::<f64>()
    })
}

pub fn beta_invariants(mj: &MetricJet, oj: &OneFormJet, chr: &ChristoffelData, y: &TangentVector) -> Result<BetaInvariants> {
    let n = mj.dim();
    if oj.order < 1 {
        return Err(Error::JetOrder { requested: 1, max: oj.order });
    }
    if y.components.len() != n {
        return Err(Error::Shape { expected: n, got: y.components.len() });
    }
    let yv = y.components.clone();
    let b_cov = covariant_first(oj, chr, n);
    let r = Tensor::from_fn(n, 2, |i| 0.5 * (b_cov[[i[0], i[1]]] + b_cov[[i[1], i[0]]]));
    let s = Tensor::from_fn(n, 2, |i| 0.5 * (b_cov[[i[0], i[1]]] - b_cov[[i[1], i[0]]]));
    let s_up = Tensor::from_fn(n, 2, |i| (0..n).map(|k| mj.a_inv[[i[0], k]] * s[[k, i[1]]]).sum());
    let t = Tensor::from_fn(n, 2, |i| (0..n).map(|m| s[[i[0], m]] * s_up[[m, i[1]]]).sum());
    let b_up = mj.raise_vec(&oj.b);
    let b2 = dot(&b_up, &oj.b);
    let r_vec: Vec<f64> = (0..n).map(|j| (0..n).map(|i| b_up[i] * r[[i, j]]).sum()).collect();
    let s_vec: Vec<f64> = (0..n).map(|j| (0..n).map(|i| b_up[i] * s[[i, j]]).sum()).collect();
    let y_low = mj.lower_vec(&yv);
    let alpha = dot(&y_low, &yv).sqrt();
    let beta = dot(&oj.b, &yv);
    let s_i0 = s_up.mat_vec(&yv);
    let s_low_i0 = s.mat_vec(&yv);
    Ok(BetaInvariants {
        t_trace: (0..n).map(|m| (0..n).map(|k| mj.a_inv[[m, k]] * t[[k, m]]).sum::<f64>()).sum(),
        r00: r.bilinear(&yv, &yv),
        s0: dot(&s_vec, &yv),
        t00: t.bilinear(&yv, &yv),
        b_cov,
        r,
        s,
        s_up,
        r_vec,
        s_vec,
        t,
        b_low: oj.b.clone(),
        b_up,
        b2,
        y: yv,
        y_low,
        alpha,
        beta,
        s_i0,
        s_low_i0,
    })
}

/// Second covariant derivatives of β.
#[derive(Debug, Clone)]
pub struct SecondCovariantData {
    /// `b_{i|j|k}`
    pub b_cov_cov: Tensor,
    /// `s_{ij|k}`
    pub s_cov: Tensor,
    /// `r_{ij|k}`
    pub r_cov: Tensor,
    a_inv: Tensor,
}

impl SecondCovariantData {
    /// `s^m_{0|m} = y^j a^{mk} s_{mj|k}`.
    pub fn div_s0(&self, y: &[f64]) -> f64 {
        self.trace_first_with_derivative(&self.s_cov, y)
    }

    /// `r^m_{0|m} = y^j a^{mk} r_{mj|k}`.
    pub fn div_r0(&self, y: &[f64]) -> f64 {
        self.trace_first_with_derivative(&self.r_cov, y)
    }

    /// `r^m_{m|0} = a^{mk} r_{mk|l} y^l`.
    pub fn trace_r_along(&self, y: &[f64]) -> f64 {
        let n = y.len();
        let mut acc = 0.0;
        for m in 0..n {
            for k in 0..n {
                for l in 0..n {
                    acc += self.a_inv[[m, k]] * self.r_cov[[m, k, l]] * y[l];
                }
            }
        }
        acc
    }

    /// `s^i_{0|j} = a^{ik} s_{kl|j} y^l` as `[[i, j]]`.
    pub fn s_up_0_cov(&self, y: &[f64]) -> Tensor {
        let n = y.len();
        Tensor::from_fn(n, 2, |idx| {
            let (i, j) = (idx[0], idx[1]);
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += self.a_inv[[i, k]] * self.s_cov[[k, l, j]] * y[l];
                }
            }
            acc
        })
    }

    fn trace_first_with_derivative(&self, t: &Tensor, y: &[f64]) -> f64 {
        let n = y.len();
        let mut acc = 0.0;
        for m in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc += self.a_inv[[m, k]] * t[[m, j, k]] * y[j];
                }
            }
        }
        acc
    }
}

pub fn second_covariant(mj: &MetricJet, oj: &OneFormJet, chr: &ChristoffelData) -> Result<SecondCovariantData> {
    if oj.order < 2 {
        return Err(Error::JetOrder { requested: 2, max: oj.order });
    }
    if mj.order < 2 {
        return Err(Error::JetOrder { requested: 2, max: mj.order });
    }
    let n = mj.dim();
    let (g, dg) = (&chr.gamma, &chr.dgamma);
    let b_cov = covariant_first(oj, chr, n);
    // ∂_k b_{i|j} = ∂_k∂_j b_i - ∂_k Γ^m_ij b_m - Γ^m_ij ∂_k b_m
    let d_b_cov = Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let mut v = oj.ddb[[i, j, k]];
        for m in 0..n {
            v -= dg[[m, i, j, k]] * oj.b[m] + g[[m, i, j]] * oj.db[[m, k]];
        }
        v
    });
    let b_cov_cov = Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let mut v = d_b_cov[[i, j, k]];
        for m in 0..n {
            v -= g[[m, k, i]] * b_cov[[m, j]] + g[[m, k, j]] * b_cov[[i, m]];
        }
        v
    });
    let s_cov = Tensor::from_fn(n, 3, |i| 0.5 * (b_cov_cov[[i[0], i[1], i[2]]] - b_cov_cov[[i[1], i[0], i[2]]]));
    let r_cov = Tensor::from_fn(n, 3, |i| 0.5 * (b_cov_cov[[i[0], i[1], i[2]]] + b_cov_cov[[i[1], i[0], i[2]]]));
    Ok(SecondCovariantData { b_cov_cov, s_cov, r_cov, a_inv: mj.a_inv.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{eval_metric_jet, eval_oneform_jet, ChartPoint, MetricField, OneFormField};
    use crate::fields::*;

    fn local(metric: &dyn MetricField, form: &dyn OneFormField, x: &[f64]) -> (MetricJet, OneFormJet, ChristoffelData) {
        let p = ChartPoint::new(metric.chart_id(), x.to_vec()).unwrap();
        let mj = eval_metric_jet(metric, &p, 2).unwrap();
        let oj = eval_oneform_jet(form, &p, 2).unwrap();
        let chr = christoffel(&mj).unwrap();
        (mj, oj, chr)
    }

    fn dir(x: &[f64], y: &[f64], chart: &str) -> TangentVector {
        TangentVector::new(ChartPoint::new(chart, x.to_vec()).unwrap(), y.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_christoffel_vanishes() {
        let form = ConstantForm { chart: EUCLIDEAN_CHART.into(), b: vec![0.3, 0.0, 0.1] };
        let (mj, oj, chr) = local(&Euclidean { n: 3 }, &form, &[1.0, 2.0, -0.5]);
        assert_eq!(chr.gamma.max_abs(), 0.0);
        let curv = alpha_curvature(&mj, &chr).unwrap();
        assert_eq!(curv.riem.max_abs(), 0.0);
        let inv = beta_invariants(&mj, &oj, &chr, &dir(&[1.0, 2.0, -0.5], &[1.0, 0.0, 0.0], EUCLIDEAN_CHART)).unwrap();
        assert_eq!(inv.r.max_abs() + inv.s.max_abs() + inv.t.max_abs(), 0.0);
        let sc = second_covariant(&mj, &oj, &chr).unwrap();
        assert_eq!(sc.s_cov.max_abs(), 0.0);
        assert_eq!(sc.div_s0(&[0.2, 1.0, 0.0]), 0.0);
    }

    #[test]
    fn sphere_christoffel_closed_form() {
        let hopf = HopfForm { eps: 0.3 };
        let (_, _, chr0) = local(&StereographicSphere::unit(3), &hopf, &[0.0; 3]);
        assert!(chr0.gamma.max_abs() < 1e-15);
        let x = [0.3, 0.0, 0.0];
        let (_, _, chr) = local(&StereographicSphere::unit(3), &hopf, &x);
        let d = 1.0 + 0.09;
        let kd = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let expect = -2.0 * (kd(i, j) * x[k] + kd(i, k) * x[j] - kd(j, k) * x[i]) / d;
                    assert!((chr.gamma[[i, j, k]] - expect).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn unit_sphere_ricci_is_twice_metric() {
        let hopf = HopfForm { eps: 0.3 };
        for x in [[0.1, 0.5, -0.3], [1.2, -0.4, 0.0]] {
            let (mj, _, chr) = local(&StereographicSphere::unit(3), &hopf, &x);
            let curv = alpha_curvature(&mj, &chr).unwrap();
            let dev = curv.ric.max_abs_diff(&mj.a.map(|v| 2.0 * v));
            assert!(dev < 1e-8, "{dev}");
            assert!(curv.ric.max_abs_diff(&curv.ric.transpose()) < 1e-10);
            assert!(curv.bianchi_residual() < 1e-9);
        }
    }

    #[test]
    fn hopf_form_is_killing_with_constant_length() {
        let hopf = HopfForm { eps: 0.3 };
        let x = [0.4, -0.2, 0.7];
        let (mj, oj, chr) = local(&StereographicSphere::unit(3), &hopf, &x);
        let inv = beta_invariants(&mj, &oj, &chr, &dir(&x, &[0.3, 1.0, -0.5], STEREOGRAPHIC_CHART)).unwrap();
        assert!(inv.r.max_abs() < 1e-9);
        assert!(inv.s_vec.iter().all(|v| v.abs() < 1e-9));
        assert!((inv.b2 - 0.09).abs() < 1e-9);
        // t_ij = b_i b_j - a_ij b²
        let expect = Tensor::from_fn(3, 2, |i| oj.b[i[0]] * oj.b[i[1]] - mj.a[[i[0], i[1]]] * inv.b2);
        assert!(inv.t.max_abs_diff(&expect) < 1e-8);
    }
}
