//! Sprays and curvature of `F = α φ(β/α)`.
//!
//! The direct route expands `F²` as a jet in `(x, y)` around the sample
//! point (degree four overall, degree two in `x`), forms the spray
//!
//! ```text
//! G^i = ¼ g^{il} { [F²]_{x^k y^l} y^k - [F²]_{x^l} },   g_ij = ½ [F²]_{y^i y^j},
//! ```
//!
//! as a jet of degree two, and reads off every derivative the Riemann
//! curvature needs. The closed-form route evaluates the spray from the
//! β-invariants and `Q`, `Θ`, `Ψ`. Curvature of the difference
//! `T^i = G^i - ᵅG^i` is taken with respect to the Levi-Civita connection of
//! α, whose nonlinear connection is `ᵅN^m_k = Γ^m_{kl} y^l`.

use std::sync::Arc;

use serde::Serialize;

use crate::alpha::{christoffel, AlphaCurvature, BetaInvariants, ChristoffelData, SecondCovariantData};
use crate::chart::{eval_metric_jet, eval_oneform_jet, ChartPoint, MetricField, MetricJet, OneFormField, OneFormJet, TangentVector};
use crate::error::{Error, Result};
use crate::jet::{Jet, Layout};
use crate::ode::TheoremParams;
use crate::phi::{phi_jet, PhiJet, PhiProfile, QData};
use crate::tensor::{cholesky, determinant_spd, dot, norm_inf, spd_inverse, Tensor};

/// Residual above which the reduced H-trace formula is refused outright.
pub const APPLICABILITY_LIMIT: f64 = 1e-3;
/// Residual above which a formula evaluation is flagged as a near miss.
pub const HYPOTHESIS_TOL: f64 = 1e-7;

/// Jets of α and β at one chart point plus the connection of α there.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub point: ChartPoint,
    pub metric: MetricJet,
    pub form: OneFormJet,
    pub chr: ChristoffelData,
}

impl LocalGeometry {
    pub fn at(metric: &dyn MetricField, form: &dyn OneFormField, x: &[f64]) -> Result<Self> {
        let point = ChartPoint::new(metric.chart_id(), x.to_vec())?;
        let mj = eval_metric_jet(metric, &point, 2)?;
        if form.chart_id() != metric.chart_id() {
            return Err(Error::OutsideChart { chart: form.chart_id().to_string(), coords: x.to_vec() });
        }
        let oj = eval_oneform_jet(form, &point, 2)?;
        let chr = christoffel(&mj)?;
        Ok(Self { point, metric: mj, form: oj, chr })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn direction(&self, y: &[f64]) -> Result<TangentVector> {
        TangentVector::new(self.point.clone(), y.to_vec())
    }

    pub fn alpha(&self, y: &[f64]) -> f64 {
        self.metric.norm(y)
    }

    pub fn beta(&self, y: &[f64]) -> f64 {
        dot(&self.form.b, y)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FundamentalTensor {
    pub g: Tensor,
    pub g_inv: Tensor,
    pub det: f64,
    /// `F²` at `(x, y)`
    pub f2: f64,
}

/// Derivatives of a spray `G^i(x, y)` at a point:
/// `dx[[i, k]] = ∂G^i/∂x^k`, `dy[[i, k]] = ∂G^i/∂y^k`,
/// `dxdy[[i, m, k]] = ∂²G^i/∂x^m∂y^k`, `dydy[[i, m, k]] = ∂²G^i/∂y^m∂y^k`.
#[derive(Debug, Clone, Serialize)]
pub struct SprayDerivs {
    pub g: Vec<f64>,
    pub dx: Tensor,
    pub dy: Tensor,
    pub dxdy: Tensor,
    pub dydy: Tensor,
}

impl SprayDerivs {
    fn minus(&self, other: &SprayDerivs) -> SprayDerivs {
        let sub = |a: &Tensor, b: &Tensor| Tensor::from_fn(a.dim(), a.rank(), |i| a.get(i) - b.get(i));
        SprayDerivs {
            g: self.g.iter().zip(&other.g).map(|(a, b)| a - b).collect(),
            dx: sub(&self.dx, &other.dx),
            dy: sub(&self.dy, &other.dy),
            dxdy: sub(&self.dxdy, &other.dxdy),
            dydy: sub(&self.dydy, &other.dydy),
        }
    }

    /// Spray of α from its Christoffel symbols.
    pub fn of_alpha(chr: &ChristoffelData, y: &[f64]) -> Self {
        let n = y.len();
        let (g, dg) = (&chr.gamma, &chr.dgamma);
        let dx = Tensor::from_fn(n, 2, |idx| {
            let (i, m) = (idx[0], idx[1]);
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += dg[[i, j, k, m]] * y[j] * y[k];
                }
            }
            0.5 * acc
        });
        let dy = Tensor::from_fn(n, 2, |idx| (0..n).map(|j| g[[idx[0], idx[1], j]] * y[j]).sum());
        let dxdy = Tensor::from_fn(n, 3, |idx| (0..n).map(|j| dg[[idx[0], idx[2], j, idx[1]]] * y[j]).sum());
        let dydy = Tensor::from_fn(n, 3, |idx| g[[idx[0], idx[1], idx[2]]]);
        SprayDerivs { g: chr.spray(y), dx, dy, dxdy, dydy }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SprayResult {
    pub y: Vec<f64>,
    /// `ᵅG^i` and derivatives
    pub alpha: SprayDerivs,
    /// `G^i` of `F` and derivatives
    pub full: SprayDerivs,
    /// `T^i = G^i - ᵅG^i`
    pub t_vec: Vec<f64>,
    pub s: f64,
    pub phi: PhiJet,
}

impl SprayResult {
    pub fn g_alpha(&self) -> &[f64] {
        &self.alpha.g
    }

    pub fn g_full(&self) -> &[f64] {
        &self.full.g
    }

    pub fn difference(&self) -> SprayDerivs {
        self.full.minus(&self.alpha)
    }
}

/// Evaluates the direct spray pipeline in a fixed dimension.
#[derive(Debug, Clone)]
pub struct SprayEngine {
    n: usize,
    layout: Arc<Layout>,
}

struct EnergyJets {
    y: Vec<Jet>,
    energy: Jet,
    s: f64,
    phi: PhiJet,
}

impl SprayEngine {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(n));
        }
        Ok(Self { n, layout: Layout::with_group_cap(2 * n, 4, (0, n), 2) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn x_var(&self, k: usize) -> usize {
        k
    }

    fn y_var(&self, k: usize) -> usize {
        self.n + k
    }

    /// Degree-two Taylor polynomial in the x-displacement.
    fn field_jet(&self, value: f64, grad: impl Fn(usize) -> f64, hess: impl Fn(usize, usize) -> f64) -> Jet {
        let n = self.n;
        let mut j = Jet::constant(&self.layout, value);
        let mut e = vec![0u8; 2 * n];
        for k in 0..n {
            e[k] = 1;
            j.set_coeff(&e, grad(k));
            e[k] = 0;
        }
        for k in 0..n {
            for l in k..n {
                e[k] += 1;
                e[l] += 1;
                j.set_coeff(&e, if k == l { 0.5 * hess(k, k) } else { hess(k, l) });
                e[k] = 0;
                e[l] = 0;
            }
        }
        j
    }

    fn energy(&self, local: &LocalGeometry, y: &[f64], phi: &dyn PhiProfile) -> Result<EnergyJets> {
        let n = self.n;
        if local.dim() != n || y.len() != n {
            return Err(Error::Shape { expected: n, got: y.len() });
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroDirection);
        }
        let (mj, oj) = (&local.metric, &local.form);
        let yj: Vec<Jet> = (0..n).map(|i| Jet::variable(&self.layout, self.y_var(i), y[i])).collect();

        let mut alpha2 = Jet::zero(&self.layout);
        for i in 0..n {
            for j in i..n {
                let a = self.field_jet(mj.a[[i, j]], |k| mj.da[[i, j, k]], |k, l| mj.dda[[i, j, k, l]]);
                let w = if i == j { 1.0 } else { 2.0 };
                alpha2.axpy(w, &(&a * &(&yj[i] * &yj[j])));
            }
        }
        let mut beta = Jet::zero(&self.layout);
        for i in 0..n {
            let b = self.field_jet(oj.b[i], |k| oj.db[[i, k]], |k, l| oj.ddb[[i, k, l]]);
            beta = &beta + &(&b * &yj[i]);
        }
        let alpha = alpha2.sqrt();
        let s = &beta * &alpha.recip();
        let s0 = s.value();
        let pj = phi_jet(phi, s0)?;
        let phi_s = s.compose(&pj.derivatives());
        let energy = &alpha2 * &phi_s.square();
        Ok(EnergyJets { y: yj, energy, s: s0, phi: pj })
    }

    pub fn fundamental_tensor(&self, local: &LocalGeometry, y: &[f64], phi: &dyn PhiProfile) -> Result<FundamentalTensor> {
        let ej = self.energy(local, y, phi)?;
        let n = self.n;
        let g = Tensor::from_fn(n, 2, |i| 0.5 * ej.energy.partial_vars(&[self.y_var(i[0]), self.y_var(i[1])]));
        fundamental_from(g, ej.energy.value(), &local.point.coords)
    }

    /// Spray of `F` with all derivatives entering the Riemann curvature.
    pub fn spray_direct(&self, local: &LocalGeometry, y: &[f64], phi: &dyn PhiProfile) -> Result<SprayResult> {
        let n = self.n;
        let ej = self.energy(local, y, phi)?;
        let e = &ej.energy;
        let gval = Tensor::from_fn(n, 2, |i| 0.5 * e.partial_vars(&[self.y_var(i[0]), self.y_var(i[1])]));
        if cholesky(&gval).is_none() {
            return Err(Error::NotPositiveDefinite { context: format!("g_ij at x = {:?}, y = {:?}", local.point.coords, y) });
        }

        let e_y: Vec<Jet> = (0..n).map(|l| e.derivative(self.y_var(l))).collect();
        let e_x: Vec<Jet> = (0..n).map(|l| e.derivative(self.x_var(l))).collect();
        let g: Vec<Vec<Jet>> =
            (0..n).map(|i| (0..n).map(|j| e_y[i].derivative(self.y_var(j)).scale(0.5)).collect()).collect();
        let g_inv = jet_matrix_inverse(g);

        let mut rhs = Vec::with_capacity(n);
        for l in 0..n {
            let mut acc = -&e_x[l];
            for k in 0..n {
                acc = &acc + &(&e_y[l].derivative(self.x_var(k)) * &ej.y[k]);
            }
            rhs.push(acc);
        }
        let spray: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = Jet::zero(&self.layout);
                for l in 0..n {
                    acc = &acc + &(&g_inv[i][l] * &rhs[l]);
                }
                acc.scale(0.25)
            })
            .collect();

        let full = SprayDerivs {
            g: spray.iter().map(Jet::value).collect(),
            dx: Tensor::from_fn(n, 2, |i| spray[i[0]].partial_vars(&[self.x_var(i[1])])),
            dy: Tensor::from_fn(n, 2, |i| spray[i[0]].partial_vars(&[self.y_var(i[1])])),
            dxdy: Tensor::from_fn(n, 3, |i| spray[i[0]].partial_vars(&[self.x_var(i[1]), self.y_var(i[2])])),
            dydy: Tensor::from_fn(n, 3, |i| spray[i[0]].partial_vars(&[self.y_var(i[1]), self.y_var(i[2])])),
        };
        let alpha = SprayDerivs::of_alpha(&local.chr, y);
        let t_vec = full.g.iter().zip(&alpha.g).map(|(a, b)| a - b).collect();
        Ok(SprayResult { y: y.to_vec(), alpha, full, t_vec, s: ej.s, phi: ej.phi })
    }
}

fn fundamental_from(g: Tensor, f2: f64, x: &[f64]) -> Result<FundamentalTensor> {
    let g_inv = spd_inverse(&g).ok_or_else(|| Error::NotPositiveDefinite { context: format!("g_ij at x = {x:?}") })?;
    let det = determinant_spd(&g).expect("positive definite");
    Ok(FundamentalTensor { g, g_inv, det, f2 })
}

/// Gauss-Jordan inverse of a symmetric positive-definite jet matrix.
fn jet_matrix_inverse(mut m: Vec<Vec<Jet>>) -> Vec<Vec<Jet>> {
    let n = m.len();
    let layout = Arc::clone(m[0][0].layout());
    let mut inv: Vec<Vec<Jet>> =
        (0..n).map(|i| (0..n).map(|j| Jet::constant(&layout, if i == j { 1.0 } else { 0.0 })).collect()).collect();
    for c in 0..n {
        let p = m[c][c].recip();
        for j in 0..n {
            m[c][j] = &m[c][j] * &p;
            inv[c][j] = &inv[c][j] * &p;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = m[r][c].clone();
            for j in 0..n {
                let dm = &f * &m[c][j];
                let di = &f * &inv[c][j];
                m[r][j] = &m[r][j] - &dm;
                inv[r][j] = &inv[r][j] - &di;
            }
        }
    }
    inv
}

/// `R^i_k = 2∂_k G^i - y^m ∂²G^i/∂x^m∂y^k + 2G^m ∂²G^i/∂y^m∂y^k - ∂G^i/∂y^m ∂G^m/∂y^k`.
pub fn riemann_curvature(d: &SprayDerivs, y: &[f64]) -> Tensor {
    let n = y.len();
    Tensor::from_fn(n, 2, |idx| {
        let (i, k) = (idx[0], idx[1]);
        let mut r = 2.0 * d.dx[[i, k]];
        for m in 0..n {
            r += -y[m] * d.dxdy[[i, m, k]] + 2.0 * d.g[m] * d.dydy[[i, m, k]] - d.dy[[i, m]] * d.dy[[m, k]];
        }
        r
    })
}

/// The Ricci scalar from the traced formula, without forming `R^i_k`.
pub fn ricci(d: &SprayDerivs, y: &[f64]) -> f64 {
    let n = y.len();
    let mut ric = 0.0;
    for i in 0..n {
        ric += 2.0 * d.dx[[i, i]];
        for m in 0..n {
            ric += -y[m] * d.dxdy[[i, m, i]] + 2.0 * d.g[m] * d.dydy[[i, m, i]] - d.dy[[i, m]] * d.dy[[m, i]];
        }
    }
    ric
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormSpray {
    pub g_alpha: Vec<f64>,
    pub g_full: Vec<f64>,
    pub t_vec: Vec<f64>,
}

/// `G^i = ᵅG^i + αQ s^i_0 + Θ{r₀₀ - 2Qα s₀} y^i/α + Ψ{r₀₀ - 2Qα s₀} b^i`.
pub fn spray_closed_form(chr: &ChristoffelData, inv: &BetaInvariants, qd: &QData) -> Result<ClosedFormSpray> {
    if (qd.b2 - inv.b2).abs() > 1e-9 * inv.b2.max(1.0) || (qd.s - inv.ratio()).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "Q data taken at (s, b²) = ({}, {}) but the point has ({}, {})",
            qd.s,
            qd.b2,
            inv.ratio(),
            inv.b2
        )));
    }
    if qd.delta.abs() < crate::phi::DEGENERACY_EPS {
        return Err(Error::DeltaDegenerate { s: qd.s });
    }
    let alpha = inv.alpha;
    let g_alpha = chr.spray(&inv.y);
    let bracket = inv.r00 - 2.0 * qd.q * alpha * inv.s0;
    let t_vec: Vec<f64> = (0..inv.y.len())
        .map(|i| {
            alpha * qd.q * inv.s_i0[i] + qd.theta * bracket * inv.y[i] / alpha + qd.psi * bracket * inv.b_up[i]
        })
        .collect();
    let g_full = g_alpha.iter().zip(&t_vec).map(|(a, t)| a + t).collect();
    Ok(ClosedFormSpray { g_alpha, g_full, t_vec })
}

/// Intermediate contractions of `T^i` that appear in the H-trace.
#[derive(Debug, Clone, Serialize)]
pub struct TContractions {
    /// `T^i_{|i}`
    pub div_h: f64,
    /// `T^i_{|j·i}` for each `j`
    pub hv_trace: Vec<f64>,
    /// `T^i_{|j·i} y^j`
    pub hv_trace_y: f64,
    /// `T^j T^i_{·j·i}`
    pub t_vv_trace: f64,
    /// `T^i_{·j} T^j_{·i}`
    pub v_square_trace: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HTensor {
    /// `H^i_k`
    pub h: Tensor,
    pub trace: f64,
    pub pieces: TContractions,
}

/// `H^i_k = 2T^i_{|k} - T^i_{|j·k} y^j + 2T^j T^i_{·j·k} - T^i_{·j} T^j_{·k}`
/// with horizontal derivatives along α.
pub fn h_trace_tensor(spray: &SprayResult, chr: &ChristoffelData) -> HTensor {
    let y = &spray.y;
    let n = y.len();
    let t = spray.difference();
    let gam = &chr.gamma;
    let nl = &spray.alpha.dy; // ᵅN^m_k

    let h_der = Tensor::from_fn(n, 2, |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut v = t.dx[[i, j]];
        for m in 0..n {
            v += -nl[[m, j]] * t.dy[[i, m]] + t.g[m] * gam[[i, m, j]];
        }
        v
    });
    let hv_der = Tensor::from_fn(n, 3, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let mut v = t.dxdy[[i, j, k]];
        for m in 0..n {
            v += -gam[[m, j, k]] * t.dy[[i, m]] - nl[[m, j]] * t.dydy[[i, m, k]] + t.dy[[m, k]] * gam[[i, m, j]];
        }
        v
    });
    let h = Tensor::from_fn(n, 2, |idx| {
        let (i, k) = (idx[0], idx[1]);
        let mut v = 2.0 * h_der[[i, k]];
        for j in 0..n {
            v += -y[j] * hv_der[[i, j, k]] + 2.0 * t.g[j] * t.dydy[[i, j, k]] - t.dy[[i, j]] * t.dy[[j, k]];
        }
        v
    });

    let hv_trace: Vec<f64> = (0..n).map(|j| (0..n).map(|i| hv_der[[i, j, i]]).sum()).collect();
    let mut t_vv_trace = 0.0;
    let mut v_square_trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            t_vv_trace += t.g[j] * t.dydy[[i, j, i]];
            v_square_trace += t.dy[[i, j]] * t.dy[[j, i]];
        }
    }
    let pieces = TContractions {
        div_h: h_der.trace(),
        hv_trace_y: dot(&hv_trace, y),
        hv_trace,
        t_vv_trace,
        v_square_trace,
    };
    HTensor { trace: h.trace(), h, pieces }
}

/// Which hypotheses the H-trace formula was evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicability {
    Applicable,
    /// Condition (b)/(c) residuals between the hypothesis tolerance and the
    /// applicability limit.
    NearMiss,
}

#[derive(Debug, Clone, Serialize)]
pub struct HFormula {
    pub applicability: Applicability,
    /// `max(|r_ij|, |s_j|)` at the point
    pub bc_residual: f64,
    /// `2(Q' - Q² + sQQ')t₀₀ - α²Q² t^m_m + 2αQ s^m_{0|m}`
    pub h_trace: f64,
    /// Whether conditions (a) and (d) held at the point, enabling `reduced`.
    pub ad_residual: f64,
    /// `(c₁+c₂b²)τ{2(Q'-Q²+sQQ')(s²-b²) + (n-1)Q²b² + 2(n-1)sQ}α²`
    pub reduced: Option<f64>,
}

/// Local residuals of conditions (a) and (d) in tensor form.
pub fn condition_ad_residuals(curv: &AlphaCurvature, metric: &MetricJet, inv: &BetaInvariants, params: &TheoremParams) -> (f64, f64) {
    let n = metric.dim();
    let nf = (n as f64) - 1.0;
    let b = &inv.b_low;
    let mut ra = 0.0f64;
    let mut rd = 0.0f64;
    let k = (params.c1 + params.c2 * inv.b2) * params.tau;
    for i in 0..n {
        for j in 0..n {
            let ric_expect = nf * (params.c1 * metric.a[[i, j]] + params.c2 * b[i] * b[j]) * params.tau;
            ra = ra.max((curv.ric[[i, j]] - ric_expect).abs());
            let t_expect = k * (b[i] * b[j] - metric.a[[i, j]] * inv.b2);
            rd = rd.max((inv.t[[i, j]] - t_expect).abs());
        }
    }
    (ra, rd)
}

pub fn h_trace_formula(
    curv: &AlphaCurvature,
    metric: &MetricJet,
    inv: &BetaInvariants,
    second: &SecondCovariantData,
    qd: &QData,
    params: &TheoremParams,
) -> Result<HFormula> {
    let bc_residual = inv.r.max_abs().max(norm_inf(&inv.s_vec));
    if bc_residual > APPLICABILITY_LIMIT {
        return Err(Error::NotApplicable { residual: bc_residual });
    }
    let applicability = if bc_residual > HYPOTHESIS_TOL { Applicability::NearMiss } else { Applicability::Applicable };
    let (q, dq, s) = (qd.q, qd.dq, qd.s);
    let alpha = inv.alpha;
    let core = dq - q * q + s * q * dq;
    let h_trace = 2.0 * core * inv.t00 - alpha * alpha * q * q * inv.t_trace + 2.0 * alpha * q * second.div_s0(&inv.y);

    let (ra, rd) = condition_ad_residuals(curv, metric, inv, params);
    let ad_residual = ra.max(rd);
    let reduced = (ad_residual <= HYPOTHESIS_TOL).then(|| {
        let nf = params.n as f64 - 1.0;
        let b2 = qd.b2;
        (params.c1 + params.c2 * b2)
            * params.tau
            * (2.0 * core * (s * s - b2) + nf * q * q * b2 + 2.0 * nf * s * q)
            * alpha
            * alpha
    });
    Ok(HFormula { applicability, bc_residual, h_trace, ad_residual, reduced })
}

/// `Γ = (c₁+c₂b²){2(Q' - Q² + sQQ')(s² - b²) + (n-1)Q²b² + 2(n-1)sQ}`.
pub fn gamma_factor(s: f64, params: &TheoremParams, qd: &QData) -> f64 {
    let (q, dq) = (qd.q, qd.dq);
    let b2 = params.b2;
    let nf = params.n as f64 - 1.0;
    (params.c1 + params.c2 * b2) * (2.0 * (dq - q * q + s * q * dq) * (s * s - b2) + nf * q * q * b2 + 2.0 * nf * s * q)
}

/// Curvature of `F` at one `(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureResult {
    /// `R^i_k`
    pub r_mat: Tensor,
    pub ric: f64,
    pub ric_alpha: f64,
    /// `H^i_i` from the tensor formula
    pub h_trace: f64,
    pub gamma_factor: f64,
}

pub fn curvature_result(
    spray: &SprayResult,
    chr: &ChristoffelData,
    curv: &AlphaCurvature,
    params: &TheoremParams,
    qd: &QData,
) -> CurvatureResult {
    let y = &spray.y;
    CurvatureResult {
        r_mat: riemann_curvature(&spray.full, y),
        ric: ricci(&spray.full, y),
        ric_alpha: curv.ric_quadratic(y),
        h_trace: h_trace_tensor(spray, chr).trace,
        gamma_factor: gamma_factor(spray.s, params, qd),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{alpha_curvature, beta_invariants, second_covariant};
    use crate::fields::*;
    use crate::phi::{q_data, BuiltinPhi};

    fn sphere_hopf(x: &[f64]) -> LocalGeometry {
        LocalGeometry::at(&StereographicSphere::unit(3), &HopfForm { eps: 0.3 }, x).unwrap()
    }

    #[test]
    fn riemannian_profile_gives_metric() {
        let local = sphere_hopf(&[0.2, -0.1, 0.4]);
        let eng = SprayEngine::new(3).unwrap();
        let y = [0.5, 1.0, -0.3];
        let ft = eng.fundamental_tensor(&local, &y, &BuiltinPhi::Riemannian).unwrap();
        assert!(ft.g.max_abs_diff(&local.metric.a) < 1e-13);
    }

    #[test]
    fn euler_homogeneity_of_g() {
        let local = sphere_hopf(&[0.2, -0.1, 0.4]);
        let eng = SprayEngine::new(3).unwrap();
        let y = [0.5, 1.0, -0.3];
        for phi in BuiltinPhi::ALL {
            let ft = eng.fundamental_tensor(&local, &y, &phi).unwrap();
            assert!((ft.g.bilinear(&y, &y) - ft.f2).abs() < 1e-10 * ft.f2.max(1.0));
        }
    }

    #[test]
    fn euclidean_randers_fundamental_tensor_matches_fd_hessian() {
        let form = ConstantForm { chart: EUCLIDEAN_CHART.into(), b: vec![0.3, 0.0, 0.0] };
        let local = LocalGeometry::at(&Euclidean { n: 3 }, &form, &[0.0; 3]).unwrap();
        let eng = SprayEngine::new(3).unwrap();
        let y = [1.0, 0.0, 0.0];
        let ft = eng.fundamental_tensor(&local, &y, &BuiltinPhi::Randers).unwrap();
        assert!(ft.det > 0.0);
        let half_f2 = |v: &[f64]| {
            let a = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            0.5 * (a + 0.3 * v[0]).powi(2)
        };
        for i in 0..3 {
            for j in 0..3 {
                let mut mi = [0usize; 3];
                mi[i] += 1;
                mi[j] += 1;
                let h = crate::chart::fd_oracle(&half_f2, &y, &mi, 1e-4).unwrap();
                assert!((h - ft.g[[i, j]]).abs() < 1e-6, "({i},{j}) {h} vs {}", ft.g[[i, j]]);
            }
        }
    }

    #[test]
    fn sphere_alpha_spray_and_curvature() {
        let local = sphere_hopf(&[0.3, 0.2, -0.5]);
        let eng = SprayEngine::new(3).unwrap();
        let y = [0.7, -0.2, 0.4];
        let sp = eng.spray_direct(&local, &y, &BuiltinPhi::Riemannian).unwrap();
        for i in 0..3 {
            assert!((sp.full.g[i] - sp.alpha.g[i]).abs() < 1e-9);
        }
        let a2 = local.alpha(&y).powi(2);
        let r = riemann_curvature(&sp.full, &y);
        assert!((r.trace() - 2.0 * a2).abs() < 1e-8);
        assert!(norm_inf(&r.mat_vec(&y)) < 1e-8);
        assert!((ricci(&sp.full, &y) - r.trace()).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_direct_on_perturbed_form() {
        let form = PerturbedHopfForm { eps: 0.3, eta: 0.05 };
        let local = LocalGeometry::at(&StereographicSphere::unit(3), &form, &[0.1, 0.4, -0.2]).unwrap();
        let eng = SprayEngine::new(3).unwrap();
        let y = [0.2, 0.3, 0.35];
        let inv = beta_invariants(&local.metric, &local.form, &local.chr, &local.direction(&y).unwrap()).unwrap();
        assert!(inv.r.max_abs() > 1e-3);
        for phi in BuiltinPhi::ALL {
            let sp = eng.spray_direct(&local, &y, &phi).unwrap();
            let qd = q_data(&sp.phi, inv.b2).unwrap();
            let cf = spray_closed_form(&local.chr, &inv, &qd).unwrap();
            let diff: f64 = sp.full.g.iter().zip(&cf.g_full).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff <= 1e-8 * norm_inf(&sp.full.g), "{phi:?}: {diff}");
        }
    }

    #[test]
    fn h_trace_three_way_on_hopf_randers() {
        let local = sphere_hopf(&[0.25, -0.3, 0.1]);
        let eng = SprayEngine::new(3).unwrap();
        let y = [0.1, 0.45, -0.2];
        let sp = eng.spray_direct(&local, &y, &BuiltinPhi::Randers).unwrap();
        let curv = alpha_curvature(&local.metric, &local.chr).unwrap();
        let ht = h_trace_tensor(&sp, &local.chr);
        let ric_f = ricci(&sp.full, &y);
        let ric_a = curv.ric_quadratic(&y);
        assert!((ric_f - ric_a - ht.trace).abs() < 1e-9, "{} vs {}", ric_f - ric_a, ht.trace);

        let inv = beta_invariants(&local.metric, &local.form, &local.chr, &local.direction(&y).unwrap()).unwrap();
        let sc = second_covariant(&local.metric, &local.form, &local.chr).unwrap();
        let qd = q_data(&sp.phi, inv.b2).unwrap();
        let params = TheoremParams { c1: 1.0, c2: 0.0, n: 3, b2: 0.09, tau: 1.0 };
        let hf = h_trace_formula(&curv, &local.metric, &inv, &sc, &qd, &params).unwrap();
        assert_eq!(hf.applicability, Applicability::Applicable);
        assert!((hf.h_trace - ht.trace).abs() < 1e-9);
        assert!((hf.reduced.unwrap() - ht.trace).abs() < 1e-9);
    }

    #[test]
    fn gamma_factor_examples() {
        let params = TheoremParams { c1: 1.0, c2: 0.0, n: 3, b2: 0.09, tau: 1.0 };
        let randers = q_data(&crate::phi::phi_jet(&BuiltinPhi::Randers, 0.0).unwrap(), 0.09).unwrap();
        assert!((gamma_factor(0.0, &params, &randers) - 0.36).abs() < 1e-15);
        let flat = q_data(&crate::phi::phi_jet(&BuiltinPhi::Riemannian, 0.1).unwrap(), 0.09).unwrap();
        assert_eq!(gamma_factor(0.1, &params, &flat), 0.0);
    }
}
