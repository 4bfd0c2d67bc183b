//! Scenarios and the checks run on them: the hypotheses (a)–(e) of the
//! Ricci-flatness theorem, the divergence lemma for `s^m_{0|m}`, the
//! identity chain behind the H-trace, and the conclusion `Ric = 0`.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{alpha_curvature, beta_invariants, second_covariant, AlphaCurvature, BetaInvariants, SecondCovariantData};
use crate::chart::{default_fd_step, fd_oracle, metric_values, oneform_values, MetricField, OneFormField};
use crate::error::{Error, Result};
use crate::fields::{ConstantForm, Euclidean, HopfForm, PerturbedHopfForm, StereographicSphere, EUCLIDEAN_CHART, STEREOGRAPHIC_CHART};
use crate::finsler::{
    condition_ad_residuals, curvature_result, gamma_factor, h_trace_formula, h_trace_tensor, ricci, spray_closed_form,
    Applicability, CurvatureResult, LocalGeometry, SprayEngine,
};
use crate::ode::{ode_residual, phi_from_q, solve_q, TheoremParams};
use crate::phi::{phi_jet, q_data, BuiltinPhi, PhiProfile};
use crate::tensor::{cholesky, norm_inf, Tensor};

pub const SCHEMA_VERSION: u32 = 1;
pub const HYPOTHESIS_TOL: f64 = 1e-7;
pub const CONCLUSION_TOL: f64 = 1e-5;
pub const SPRAY_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const DECOMPOSITION_TOL: f64 = 1e-7;
pub const FINAL_DISPLAY_TOL: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-6;
/// Default `δ_s` as a fraction of `b`.
pub const DEFAULT_DELTA_S_FRACTION: f64 = 0.02;
const MAX_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean { n: usize },
    Sphere { n: usize, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FormSpec {
    Constant { b: Vec<f64> },
    Hopf { eps: f64 },
    PerturbedHopf { eps: f64, eta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Builtin { model: BuiltinPhi },
    /// Numerical solution of the Ricci-flat equation with `Q(0) = q0`.
    Ode { q0: f64, delta: f64, tol: f64 },
}

impl PhiSpec {
    pub fn label(&self) -> String {
        match self {
            PhiSpec::Builtin { model } => model.key().to_string(),
            PhiSpec::Ode { q0, .. } => format!("ode(q0={q0})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    A,
    B,
    C,
    D,
    E,
    Divergence,
    RicciFlat,
}

impl Check {
    pub const ALL: [Check; 7] = [Check::A, Check::B, Check::C, Check::D, Check::E, Check::Divergence, Check::RicciFlat];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Expected to pass every enabled check.
    Positive,
    /// Built to violate a hypothesis; the verifier should flag it.
    NegativeControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
    /// Points are drawn uniformly from `[-r, r]^n` in chart coordinates.
    pub box_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub metric: MetricSpec,
    pub form: FormSpec,
    pub phi: PhiSpec,
    pub params: TheoremParams,
    pub samples: SamplePlan,
    pub checks: Vec<Check>,
    pub role: Role,
}

const DEFAULT_PLAN: SamplePlan = SamplePlan { count: 200, seed: 20240517, box_radius: 1.0 };

fn ode_default() -> PhiSpec {
    PhiSpec::Ode { q0: 1.0, delta: 0.01, tol: 1e-10 }
}

/// Unit `S³` with `β` the Hopf form of length `ε`.
pub fn sphere3_hopf(eps: f64) -> Scenario {
    Scenario {
        name: "sphere3_hopf".into(),
        description: "unit S^3, Hopf Killing form of length eps, phi from the Ricci-flat ODE".into(),
        metric: MetricSpec::Sphere { n: 3, radius: 1.0 },
        form: FormSpec::Hopf { eps },
        phi: ode_default(),
        params: TheoremParams { c1: 1.0, c2: 0.0, n: 3, b2: eps * eps, tau: 1.0 },
        samples: DEFAULT_PLAN,
        checks: Check::ALL.to_vec(),
        role: Role::Positive,
    }
}

pub fn scenario_catalog() -> Vec<Scenario> {
    let mut out = vec![Scenario {
        name: "euclidean_parallel".into(),
        description: "flat R^3 with a constant form; tau = 0, so (a)-(e) hold trivially".into(),
        metric: MetricSpec::Euclidean { n: 3 },
        form: FormSpec::Constant { b: vec![0.3, 0.0, 0.0] },
        phi: PhiSpec::Builtin { model: BuiltinPhi::Randers },
        params: TheoremParams { c1: 0.0, c2: 0.0, n: 3, b2: 0.09, tau: 0.0 },
        samples: DEFAULT_PLAN,
        checks: Check::ALL.to_vec(),
        role: Role::Positive,
    }];
    for eps in [0.1, 0.3, 0.5] {
        out.push(sphere3_hopf(eps));
    }
    out.push(Scenario {
        name: "sphere3_hopf_perturbed".into(),
        description: "Hopf form plus the exact term eta x_i dx^i, so r_ij != 0".into(),
        form: FormSpec::PerturbedHopf { eps: 0.3, eta: 0.05 },
        role: Role::NegativeControl,
        ..sphere3_hopf(0.3)
    });
    out.push(Scenario {
        name: "sphere3_randers".into(),
        description: "F = alpha + beta on S^3 with the Hopf form; satisfies (b), (c) but not (e)".into(),
        phi: PhiSpec::Builtin { model: BuiltinPhi::Randers },
        checks: vec![Check::B, Check::C],
        role: Role::Positive,
        ..sphere3_hopf(0.3)
    });
    out.push(Scenario {
        name: "sphere3_riemannian".into(),
        description: "phi = 1 on the unit S^3; constant-curvature oracle".into(),
        phi: PhiSpec::Builtin { model: BuiltinPhi::Riemannian },
        checks: vec![Check::A, Check::B, Check::C, Check::D, Check::Divergence],
        role: Role::Positive,
        ..sphere3_hopf(0.3)
    });
    out
}

/// Catalog lookup; `eps` picks among the Hopf variants and defaults to 0.3.
pub fn find_scenario(name: &str, eps: Option<f64>) -> Result<Scenario> {
    let catalog = scenario_catalog();
    let hits: Vec<&Scenario> = catalog.iter().filter(|s| s.name == name).collect();
    match hits.as_slice() {
        [] => Err(Error::Unknown { what: "scenario", name: name.to_string() }),
        [one] => Ok((*one).clone()),
        many => {
            let want = eps.unwrap_or(0.3);
            many.iter()
                .find(|s| matches!(s.form, FormSpec::Hopf { eps } if eps == want))
                .map(|s| (*s).clone())
                .ok_or_else(|| Error::Unknown { what: "scenario variant", name: format!("{name} eps={want}") })
        }
    }
}

impl Scenario {
    pub fn dim(&self) -> usize {
        match self.metric {
            MetricSpec::Euclidean { n } | MetricSpec::Sphere { n, .. } => n,
        }
    }

    /// Set `ε` on Hopf-type forms, keeping `b²` in step.
    pub fn with_eps(mut self, new_eps: f64) -> Result<Self> {
        match &mut self.form {
            FormSpec::Hopf { eps } | FormSpec::PerturbedHopf { eps, .. } => *eps = new_eps,
            FormSpec::Constant { .. } => {
                return Err(Error::InvalidParams(format!("scenario `{}` has no eps parameter", self.name)))
            }
        }
        self.params.b2 = new_eps * new_eps;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n < 3 {
            return Err(Error::Dimension(n));
        }
        self.params.validate()?;
        if self.params.n != n {
            return Err(Error::InvalidParams(format!("params.n = {} but the metric has dimension {n}", self.params.n)));
        }
        if let MetricSpec::Sphere { radius, .. } = self.metric {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidParams(format!("sphere radius {radius} must be positive")));
            }
        }
        match &self.form {
            FormSpec::Constant { b } => {
                if b.len() != n {
                    return Err(Error::Shape { expected: n, got: b.len() });
                }
                if b.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(b.clone()));
                }
            }
            FormSpec::Hopf { eps } | FormSpec::PerturbedHopf { eps, .. } => {
                if !matches!(self.metric, MetricSpec::Sphere { n: 3, .. }) {
                    return Err(Error::InvalidParams("Hopf forms live on the 3-sphere chart".into()));
                }
                if !eps.is_finite() {
                    return Err(Error::InvalidParams(format!("eps = {eps} is not finite")));
                }
            }
        }
        if self.samples.count == 0 || !(self.samples.box_radius > 0.0) {
            return Err(Error::InvalidParams("sample plan needs count > 0 and box_radius > 0".into()));
        }
        if let PhiSpec::Ode { .. } = self.phi {
            if self.params.tau == 0.0 {
                return Err(Error::InvalidParams(
                    "tau = 0 makes Ric = 0 for any phi; ODE profiles are not built for it".into(),
                ));
            }
            self.params.validate_ode()?;
        }
        Ok(())
    }

    pub fn metric_field(&self) -> Box<dyn MetricField> {
        match self.metric {
            MetricSpec::Euclidean { n } => Box::new(Euclidean { n }),
            MetricSpec::Sphere { n, radius } => Box::new(StereographicSphere { n, radius }),
        }
    }

    pub fn form_field(&self) -> Box<dyn OneFormField> {
        let chart = match self.metric {
            MetricSpec::Euclidean { .. } => EUCLIDEAN_CHART,
            MetricSpec::Sphere { .. } => STEREOGRAPHIC_CHART,
        };
        match &self.form {
            FormSpec::Constant { b } => Box::new(ConstantForm { chart: chart.into(), b: b.clone() }),
            FormSpec::Hopf { eps } => Box::new(HopfForm { eps: *eps }),
            FormSpec::PerturbedHopf { eps, eta } => Box::new(PerturbedHopfForm { eps: *eps, eta: *eta }),
        }
    }

    pub fn build_phi(&self) -> Result<Arc<dyn PhiProfile>> {
        match self.phi {
            PhiSpec::Builtin { model } => Ok(Arc::new(model)),
            PhiSpec::Ode { q0, delta, tol } => {
                let sol = solve_q(&self.params, q0, delta, tol)?;
                if !sol.reached_both() {
                    let t = sol.terminations.iter().find(|t| !t.reached()).expect("some leg stopped early");
                    return Err(Error::OdePole { s: t.s() });
                }
                Ok(Arc::new(phi_from_q(sol)?))
            }
        }
    }

    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        Ok(Prepared {
            scenario: self.clone(),
            metric: self.metric_field(),
            form: self.form_field(),
            phi: self.build_phi()?,
            engine: SprayEngine::new(self.dim())?,
        })
    }
}

/// A scenario with its fields, profile and spray engine instantiated.
pub struct Prepared {
    pub scenario: Scenario,
    pub metric: Box<dyn MetricField>,
    pub form: Box<dyn OneFormField>,
    pub phi: Arc<dyn PhiProfile>,
    pub engine: SprayEngine,
}

impl std::fmt::Debug for Prepared {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Prepared").field("scenario", &self.scenario.name).field("phi", &self.phi.name()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub index: usize,
    pub x: Vec<f64>,
    /// α-unit direction
    pub y: Vec<f64>,
}

impl Prepared {
    pub fn local(&self, x: &[f64]) -> Result<LocalGeometry> {
        LocalGeometry::at(self.metric.as_ref(), self.form.as_ref(), x)
    }

    /// `|s|` bound for sampling: `√b² - δ_s`, pulled inside the profile's
    /// domain when that is narrower.
    pub fn s_limit(&self, delta_s: f64) -> f64 {
        let (lo, hi) = self.phi.domain();
        let edge = lo.abs().min(hi.abs());
        let inside = if edge.is_finite() { edge * (1.0 - 1e-9) } else { edge };
        (self.scenario.params.b() - delta_s).min(inside)
    }

    /// Deterministic samples: sample `i` uses ChaCha stream `i` of `seed`.
    pub fn draw_samples(&self, count: usize, seed: u64, s_limit: f64) -> Result<Vec<Sample>> {
        (0..count).into_par_iter().map(|i| self.draw_one(i, seed, s_limit)).collect()
    }

    fn draw_one(&self, index: usize, seed: u64, s_limit: f64) -> Result<Sample> {
        let n = self.scenario.dim();
        let r = self.scenario.samples.box_radius;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        for _ in 0..MAX_DRAWS {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-r..=r)).collect();
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let znorm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if znorm < 1e-12 {
                continue;
            }
            let a = metric_values(self.metric.as_ref(), &x);
            let l = cholesky(&a).ok_or_else(|| Error::NotPositiveDefinite { context: format!("a_ij at {x:?}") })?;
            // yᵀ a y = |z|² when Lᵀ y = z
            let mut y = vec![0.0; n];
            for i in (0..n).rev() {
                let acc: f64 = (i + 1..n).map(|k| l[[k, i]] * y[k]).sum();
                y[i] = (z[i] / znorm - acc) / l[[i, i]];
            }
            let b = oneform_values(self.form.as_ref(), &x);
            let s: f64 = b.iter().zip(&y).map(|(p, q)| p * q).sum();
            if s.abs() <= s_limit {
                return Ok(Sample { index, x, y });
            }
        }
        Err(Error::InvalidParams(format!("no admissible direction with |s| <= {s_limit} after {MAX_DRAWS} draws")))
    }
}

/// Residuals of the defining identities used in the H-trace derivation,
/// in force when `r_ij = 0` and `s_j = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `T^i_{|i} - (Q' t₀₀ + αQ s^i_{0|i})`
    pub h_divergence: f64,
    /// `T^i_{|j·i} y^j` and `max_j |T^i_{|j·i}|`
    pub hv_trace: f64,
    pub vv_trace: f64,
    pub v_square: f64,
    /// `y_i s^i_0`, `y_i s^i_{0|j}`, `s_ij y^i y^j`, `b_i s^i_0`, `b_i s^i_j`,
    /// `b_i s^i_{0|j} + s_ij s^i_0`: the largest of them.
    pub s_square: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.h_divergence.max(self.hv_trace).max(self.vv_trace).max(self.v_square).max(self.s_square)
    }

    fn merge(self, o: Self) -> Self {
        Self {
            h_divergence: self.h_divergence.max(o.h_divergence),
            hv_trace: self.hv_trace.max(o.hv_trace),
            vv_trace: self.vv_trace.max(o.vv_trace),
            v_square: self.v_square.max(o.v_square),
            s_square: self.s_square.max(o.s_square),
        }
    }
}

/// Everything measured at one sample. Curvature residuals are divided by
/// `α²`; the samples are α-unit, so this only matters for user points.
#[derive(Debug, Clone, Serialize)]
pub struct SampleResiduals {
    pub s: f64,
    pub b2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub divergence: f64,
    pub div_unreduced: f64,
    pub div_vs_ricci: f64,
    pub ricci_vs_beta: f64,
    pub ricci_identity: f64,
    pub ric_alpha_oracle: f64,
    pub spray: f64,
    pub decomposition: f64,
    /// `|H(formula) - H(tensor)|`, when the formula applies cleanly
    pub h_formula: Option<f64>,
    pub h_reduced: Option<f64>,
    pub identities: Option<IdentityResiduals>,
    pub final_display: f64,
    pub ricci: f64,
}

fn ricci_identity_residual(sc: &SecondCovariantData, curv: &AlphaCurvature, inv: &BetaInvariants) -> f64 {
    let n = inv.y.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let lhs = sc.b_cov_cov[[i, j, k]] - sc.b_cov_cov[[i, k, j]];
                let rhs: f64 = (0..n).map(|m| inv.b_up[m] * curv.riem_low[[i, m, j, k]]).sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

fn identity_residuals(
    inv: &BetaInvariants,
    sc: &SecondCovariantData,
    ht: &crate::finsler::HTensor,
    q: f64,
    dq: f64,
    s: f64,
) -> IdentityResiduals {
    let n = inv.y.len();
    let alpha = inv.alpha;
    let div_s0 = sc.div_s0(&inv.y);
    let p = &ht.pieces;
    let h_divergence = (p.div_h - (dq * inv.t00 + alpha * q * div_s0)).abs();
    let hv_trace = p.hv_trace_y.abs().max(norm_inf(&p.hv_trace));
    let vv_trace = p.t_vv_trace.abs();
    let v_square_expect = 2.0 * q * q * inv.t00 - 2.0 * s * q * dq * inv.t00 + alpha * alpha * q * q * inv.t_trace;
    let v_square = (p.v_square_trace - v_square_expect).abs();

    let s0j = sc.s_up_0_cov(&inv.y);
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut d2 = dot(&inv.y_low, &inv.s_i0).abs();
    d2 = d2.max(inv.s.bilinear(&inv.y, &inv.y).abs());
    d2 = d2.max(dot(&inv.b_low, &inv.s_i0).abs());
    for j in 0..n {
        let y_s0j: f64 = (0..n).map(|i| inv.y_low[i] * s0j[[i, j]]).sum();
        let b_sij: f64 = (0..n).map(|i| inv.b_low[i] * inv.s_up[[i, j]]).sum();
        let b_s0j: f64 = (0..n).map(|i| inv.b_low[i] * s0j[[i, j]]).sum();
        let s_s0: f64 = (0..n).map(|i| inv.s[[i, j]] * inv.s_i0[i]).sum();
        d2 = d2.max(y_s0j.abs()).max(b_sij.abs()).max((b_s0j + s_s0).abs());
    }
    IdentityResiduals { h_divergence, hv_trace, vv_trace, v_square, s_square: d2 }
}

impl Prepared {
    /// Every residual at a single `(x, y)`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<SampleResiduals> {
        let p = &self.scenario.params;
        let nf = p.n as f64 - 1.0;
        let local = self.local(x)?;
        let curv = alpha_curvature(&local.metric, &local.chr)?;
        let inv = beta_invariants(&local.metric, &local.form, &local.chr, &local.direction(y)?)?;
        let sc = second_covariant(&local.metric, &local.form, &local.chr)?;
        let a2 = inv.alpha * inv.alpha;
        let s = inv.ratio();
        let k = p.k();

        let ric_alpha = curv.ric_quadratic(y);
        let a_res = (ric_alpha - nf * (p.c1 * a2 + p.c2 * inv.beta * inv.beta) * p.tau).abs() / a2;
        let (_, d_res) = condition_ad_residuals(&curv, &local.metric, &inv, p);

        let div_s0 = sc.div_s0(y);
        let ric_m0: Vec<f64> = curv.ric.mat_vec(y);
        let b_ric_0: f64 = inv.b_up.iter().zip(&ric_m0).map(|(b, r)| b * r).sum();
        let norm = inv.alpha * inv.b2.sqrt().max(f64::MIN_POSITIVE);
        let divergence = (div_s0 - nf * k * p.tau * inv.beta).abs() / norm;
        let div_unreduced = (div_s0 - (b_ric_0 + sc.trace_r_along(y) - sc.div_r0(y))).abs() / norm;
        let div_vs_ricci = (div_s0 - b_ric_0).abs() / norm;
        let ricci_vs_beta = (b_ric_0 - nf * k * p.tau * inv.beta).abs() / norm;

        let sp = self.engine.spray_direct(&local, y, self.phi.as_ref())?;
        let qd = q_data(&sp.phi, inv.b2)?;
        let cf = spray_closed_form(&local.chr, &inv, &qd)?;
        let gscale = norm_inf(&sp.full.g);
        let gdiff = sp.full.g.iter().zip(&cf.g_full).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let spray = if gscale > 0.0 { gdiff / gscale } else { gdiff };

        let ht = h_trace_tensor(&sp, &local.chr);
        let ric = ricci(&sp.full, y);
        let decomposition = (ric - ric_alpha - ht.trace).abs() / a2;
        let (h_formula, h_reduced) = match h_trace_formula(&curv, &local.metric, &inv, &sc, &qd, p) {
            Ok(hf) if hf.applicability == Applicability::Applicable => {
                (Some((hf.h_trace - ht.trace).abs() / a2), hf.reduced.map(|r| (r - ht.trace).abs() / a2))
            }
            Ok(_) | Err(Error::NotApplicable { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        let bc = inv.r.max_abs().max(norm_inf(&inv.s_vec));
        let identities = (bc <= HYPOTHESIS_TOL).then(|| identity_residuals(&inv, &sc, &ht, qd.q, qd.dq, s));
        let gamma = gamma_factor(s, p, &qd);
        let final_display = (ric - p.tau * a2 * (nf * (p.c1 + p.c2 * s * s) + gamma)).abs() / a2;

        Ok(SampleResiduals {
            s,
            b2: inv.b2,
            a: a_res,
            b: inv.r.max_abs(),
            c: norm_inf(&inv.s_vec),
            d: d_res,
            divergence,
            div_unreduced,
            div_vs_ricci,
            ricci_vs_beta,
            ricci_identity: ricci_identity_residual(&sc, &curv, &inv),
            ric_alpha_oracle: (ricci(&sp.alpha, y) - ric_alpha).abs() / a2,
            spray,
            decomposition,
            h_formula,
            h_reduced,
            identities,
            final_display,
            ricci: ric.abs() / a2,
        })
    }

    /// Curvature and spray data at a user point, for display.
    pub fn curvature_at(&self, x: &[f64], y: &[f64]) -> Result<PointReport> {
        let local = self.local(x)?;
        let curv = alpha_curvature(&local.metric, &local.chr)?;
        let inv = beta_invariants(&local.metric, &local.form, &local.chr, &local.direction(y)?)?;
        let sp = self.engine.spray_direct(&local, y, self.phi.as_ref())?;
        let qd = q_data(&sp.phi, inv.b2)?;
        let cr = curvature_result(&sp, &local.chr, &curv, &self.scenario.params, &qd);
        Ok(PointReport {
            x: x.to_vec(),
            y: y.to_vec(),
            alpha: inv.alpha,
            beta: inv.beta,
            s: inv.ratio(),
            b2: inv.b2,
            f: inv.alpha * sp.phi.phi0,
            g: sp.full.g.clone(),
            g_alpha: sp.alpha.g.clone(),
            curvature: cr,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub b2: f64,
    #[serde(rename = "F")]
    pub f: f64,
    /// `G^i` of `F`
    pub g: Vec<f64>,
    pub g_alpha: Vec<f64>,
    pub curvature: CurvatureResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub enabled: bool,
}

impl ConditionResidual {
    fn new(residual: f64, tolerance: f64, enabled: bool) -> Self {
        Self { residual, tolerance, pass: residual <= tolerance, enabled }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conditions {
    pub a: ConditionResidual,
    pub b: ConditionResidual,
    pub c: ConditionResidual,
    pub d: ConditionResidual,
    pub e: ConditionResidual,
    pub divergence: ConditionResidual,
    pub ricci_flat: ConditionResidual,
}

impl Conditions {
    fn iter(&self) -> impl Iterator<Item = &ConditionResidual> {
        [&self.a, &self.b, &self.c, &self.d, &self.e, &self.divergence, &self.ricci_flat].into_iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Audits {
    pub div_unreduced: f64,
    pub div_vs_ricci: f64,
    pub ricci_vs_beta: f64,
    pub ricci_identity: f64,
    /// `|Ric(α) from the spray - Ric(α) from the Riemann tensor|`
    pub ric_alpha_oracle: f64,
    pub spray_equivalence: f64,
    /// `|Ric - ᵅRic - H^i_i|`
    pub decomposition: f64,
    /// `|H(formula) - H(tensor)|`; `None` when (b), (c) fail somewhere
    pub h_formula: Option<f64>,
    pub h_reduced: Option<f64>,
    pub identities: Option<IdentityResiduals>,
    /// `|Ric - τα²[(n-1)(c₁+c₂s²) + Γ]|`
    pub final_display: f64,
    /// `max b² - min b²` over the samples
    pub b2_spread: f64,
    pub s_range: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub hypothesis: f64,
    pub conclusion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub schema_version: u32,
    pub scenario: String,
    pub phi: String,
    pub params: TheoremParams,
    pub seed: u64,
    pub samples: usize,
    pub delta_s: f64,
    pub s_limit: f64,
    pub tolerances: Tolerances,
    pub conditions: Conditions,
    pub audits: Audits,
    /// (a)–(e) all within the hypothesis tolerance
    pub hypotheses_hold: bool,
    /// Whenever the hypotheses hold, `Ric = 0` within the conclusion tolerance.
    pub implication_holds: bool,
    /// All enabled checks pass.
    pub passed: bool,
    pub diagnostics: Vec<String>,
    /// Excluded from determinism comparisons.
    pub timing: Timing,
}

impl ConditionReport {
    /// The report with its timing block zeroed.
    pub fn without_timing(&self) -> Self {
        Self { timing: Timing { elapsed_ms: 0.0 }, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub delta_s: Option<f64>,
}

impl Prepared {
    fn resolve(&self, opts: &VerifyOptions) -> Result<(usize, u64, f64, f64)> {
        let plan = &self.scenario.samples;
        let delta_s = opts.delta_s.unwrap_or(DEFAULT_DELTA_S_FRACTION * self.scenario.params.b());
        if !(delta_s >= 0.0) {
            return Err(Error::InvalidParams(format!("delta_s = {delta_s} must be non-negative")));
        }
        let count = opts.samples.unwrap_or(plan.count);
        if count == 0 {
            return Err(Error::InvalidParams("need at least one sample".into()));
        }
        Ok((count, opts.seed.unwrap_or(plan.seed), delta_s, self.s_limit(delta_s)))
    }

    pub fn sample_residuals(&self, samples: &[Sample]) -> Result<Vec<SampleResiduals>> {
        samples.par_iter().map(|s| self.evaluate(&s.x, &s.y)).collect()
    }
}

/// `max_s |ode_residual(s, Q(s), Q'(s))|` on `count` evenly spaced points of
/// `[-s_max, s_max]`, with `Q` read off the profile.
pub fn check_condition_e(phi: &dyn PhiProfile, params: &TheoremParams, s_max: f64, count: usize) -> Result<f64> {
    if params.c1 == 0.0 && params.c2 == 0.0 {
        return Ok(0.0);
    }
    let count = count.max(2);
    let mut worst = 0.0f64;
    for k in 0..count {
        let s = -s_max + 2.0 * s_max * k as f64 / (count - 1) as f64;
        let qd = q_data(&phi_jet(phi, s)?, params.b2)?;
        worst = worst.max(ode_residual(s, qd.q, qd.dq, params).abs());
    }
    Ok(worst)
}

fn max_of(r: &[SampleResiduals], f: impl Fn(&SampleResiduals) -> f64) -> f64 {
    r.iter().map(f).fold(0.0, f64::max)
}

fn max_opt(r: &[SampleResiduals], f: impl Fn(&SampleResiduals) -> Option<f64>) -> Option<f64> {
    r.iter().map(f).try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
}

pub fn check_condition_a(prep: &Prepared, samples: &[Sample]) -> Result<f64> {
    Ok(max_of(&prep.sample_residuals(samples)?, |r| r.a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcdResiduals {
    pub r: f64,
    pub s_vec: f64,
    pub t: f64,
}

pub fn check_conditions_bcd(prep: &Prepared, samples: &[Sample]) -> Result<BcdResiduals> {
    let res = prep.sample_residuals(samples)?;
    Ok(BcdResiduals { r: max_of(&res, |r| r.b), s_vec: max_of(&res, |r| r.c), t: max_of(&res, |r| r.d) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceResiduals {
    pub divergence: f64,
    pub div_unreduced: f64,
    pub div_vs_ricci: f64,
    pub ricci_vs_beta: f64,
}

pub fn verify_divergence_lemma(prep: &Prepared, samples: &[Sample]) -> Result<DivergenceResiduals> {
    let res = prep.sample_residuals(samples)?;
    Ok(DivergenceResiduals {
        divergence: max_of(&res, |r| r.divergence),
        div_unreduced: max_of(&res, |r| r.div_unreduced),
        div_vs_ricci: max_of(&res, |r| r.div_vs_ricci),
        ricci_vs_beta: max_of(&res, |r| r.ricci_vs_beta),
    })
}

pub fn verify_ricci_flat(prep: &Prepared, opts: &VerifyOptions) -> Result<ConditionReport> {
    let start = Instant::now();
    let sc = &prep.scenario;
    let (count, seed, delta_s, s_limit) = prep.resolve(opts)?;
    let samples = prep.draw_samples(count, seed, s_limit)?;
    let res = prep.sample_residuals(&samples)?;
    let e = check_condition_e(prep.phi.as_ref(), &sc.params, s_limit, 201)?;

    let enabled = |c: Check| sc.checks.contains(&c);
    let h = HYPOTHESIS_TOL;
    let conditions = Conditions {
        a: ConditionResidual::new(max_of(&res, |r| r.a), h, enabled(Check::A)),
        b: ConditionResidual::new(max_of(&res, |r| r.b), h, enabled(Check::B)),
        c: ConditionResidual::new(max_of(&res, |r| r.c), h, enabled(Check::C)),
        d: ConditionResidual::new(max_of(&res, |r| r.d), h, enabled(Check::D)),
        e: ConditionResidual::new(e, h, enabled(Check::E)),
        divergence: ConditionResidual::new(max_of(&res, |r| r.divergence), h, enabled(Check::Divergence)),
        ricci_flat: ConditionResidual::new(max_of(&res, |r| r.ricci), CONCLUSION_TOL, enabled(Check::RicciFlat)),
    };
    let b2_min = res.iter().map(|r| r.b2).fold(f64::INFINITY, f64::min);
    let b2_max = res.iter().map(|r| r.b2).fold(f64::NEG_INFINITY, f64::max);
    let s_min = res.iter().map(|r| r.s).fold(f64::INFINITY, f64::min);
    let s_max = res.iter().map(|r| r.s).fold(f64::NEG_INFINITY, f64::max);
    let identities = res
        .iter()
        .map(|r| r.identities)
        .try_fold(IdentityResiduals::default(), |acc, v| v.map(|v| acc.merge(v)));
    let audits = Audits {
        div_unreduced: max_of(&res, |r| r.div_unreduced),
        div_vs_ricci: max_of(&res, |r| r.div_vs_ricci),
        ricci_vs_beta: max_of(&res, |r| r.ricci_vs_beta),
        ricci_identity: max_of(&res, |r| r.ricci_identity),
        ric_alpha_oracle: max_of(&res, |r| r.ric_alpha_oracle),
        spray_equivalence: max_of(&res, |r| r.spray),
        decomposition: max_of(&res, |r| r.decomposition),
        h_formula: max_opt(&res, |r| r.h_formula),
        h_reduced: max_opt(&res, |r| r.h_reduced),
        identities,
        final_display: max_of(&res, |r| r.final_display),
        b2_spread: b2_max - b2_min,
        s_range: (s_min, s_max),
    };

    let hyp = [&conditions.a, &conditions.b, &conditions.c, &conditions.d, &conditions.e];
    let hypotheses_hold = hyp.iter().all(|c| c.pass);
    let implication_holds = !hypotheses_hold || conditions.ricci_flat.pass;
    let passed = conditions.iter().filter(|c| c.enabled).all(|c| c.pass);

    let mut diagnostics = Vec::new();
    if audits.b2_spread > 1e-8 {
        diagnostics.push(format!("b^2 varies by {:.3e} across samples; the theorem assumes it constant", audits.b2_spread));
    }
    if !(conditions.a.pass && conditions.b.pass && conditions.c.pass) {
        diagnostics.push("lemma hypotheses (a), (b), (c) do not all hold; its residual is informational".into());
    }
    if audits.h_formula.is_none() {
        diagnostics.push("reduced H-trace formula skipped: r_ij or s_j nonzero at some sample".into());
    }
    if sc.params.tau == 0.0 {
        diagnostics.push("tau = 0: Ric = 0 holds for any phi, condition (e) is vacuous".into());
    }
    if s_limit < sc.params.b() - delta_s {
        diagnostics.push(format!("|s| sampling limit pulled in to {s_limit} to stay inside the profile domain"));
    }
    for c in Check::ALL {
        let r = match c {
            Check::A => conditions.a,
            Check::B => conditions.b,
            Check::C => conditions.c,
            Check::D => conditions.d,
            Check::E => conditions.e,
            Check::Divergence => conditions.divergence,
            Check::RicciFlat => conditions.ricci_flat,
        };
        if r.enabled && !r.pass {
            diagnostics.push(format!("check {c:?} failed: residual {:.3e} > {:.1e}", r.residual, r.tolerance));
        }
    }

    Ok(ConditionReport {
        schema_version: SCHEMA_VERSION,
        scenario: sc.name.clone(),
        phi: prep.phi.name(),
        params: sc.params,
        seed,
        samples: count,
        delta_s,
        s_limit,
        tolerances: Tolerances { hypothesis: HYPOTHESIS_TOL, conclusion: CONCLUSION_TOL },
        conditions,
        audits,
        hypotheses_hold,
        implication_holds,
        passed,
        diagnostics,
        timing: Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauEstimate {
    pub tau: f64,
    /// `max τ̂ - min τ̂` over the probe directions
    pub spread: f64,
    pub probes: usize,
}

/// Invert condition (a) pointwise: `τ̂ = ᵅRic/((n-1)(c₁α² + c₂β²))` over
/// the coordinate directions and their pairwise sums.
pub fn estimate_tau(prep: &Prepared, x: &[f64]) -> Result<TauEstimate> {
    let p = &prep.scenario.params;
    let n = prep.scenario.dim();
    let local = prep.local(x)?;
    let curv = alpha_curvature(&local.metric, &local.chr)?;
    let mut dirs: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            dirs.push((0..n).map(|k| if k == i || k == j { 1.0 } else { 0.0 }).collect());
            dirs.push((0..n).map(|k| if k == i { 1.0 } else if k == j { -0.5 } else { 0.0 }).collect());
        }
    }
    let mut taus = Vec::with_capacity(dirs.len());
    for y in &dirs {
        let a2 = local.alpha(y).powi(2);
        let beta = local.beta(y);
        let denom = (p.n as f64 - 1.0) * (p.c1 * a2 + p.c2 * beta * beta);
        if denom.abs() < 1e-12 * a2 {
            return Err(Error::InvalidParams(format!("c1 alpha^2 + c2 beta^2 vanishes along {y:?}")));
        }
        taus.push(curv.ric_quadratic(y) / denom);
    }
    let mean = taus.iter().sum::<f64>() / taus.len() as f64;
    let lo = taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(TauEstimate { tau: mean, spread: hi - lo, probes: taus.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XcheckReport {
    pub schema_version: u32,
    pub scenario: String,
    pub phi: String,
    pub samples: usize,
    pub seed: u64,
    /// relative `|G(direct) - G(closed form)|`
    pub spray: f64,
    /// `|Ric - ᵅRic - H(tensor)|`
    pub h_tensor: f64,
    /// `|H(formula) - H(tensor)|` when (b), (c) hold
    pub h_formula: Option<f64>,
    /// jets of `a_ij`, `b_i` and `g_ij` against finite differences, relative
    pub fd_metric: f64,
    pub fd_form: f64,
    pub fd_fundamental: f64,
    pub tolerances: XcheckTolerances,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XcheckTolerances {
    pub spray: f64,
    pub h: f64,
    pub fd: f64,
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

fn fd_audit(prep: &Prepared, sample: &Sample) -> Result<(f64, f64, f64)> {
    let n = prep.scenario.dim();
    let local = prep.local(&sample.x)?;
    let x = &sample.x;
    let mut fd_metric = 0.0f64;
    let mut fd_form = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let aij = |p: &[f64]| metric_values(prep.metric.as_ref(), p)[[i, j]];
            for k in 0..n {
                let mut e = vec![0usize; n];
                e[k] = 1;
                let d = fd_oracle(&aij, x, &e, default_fd_step(x, 1))?;
                fd_metric = fd_metric.max(rel((d - local.metric.da[[i, j, k]]).abs(), local.metric.da[[i, j, k]].abs()));
                for l in k..n {
                    let mut e = vec![0usize; n];
                    e[k] += 1;
                    e[l] += 1;
                    let d = fd_oracle(&aij, x, &e, default_fd_step(x, 2))?;
                    let v = local.metric.dda[[i, j, k, l]];
                    fd_metric = fd_metric.max(rel((d - v).abs(), v.abs()));
                }
            }
        }
        let bi = |p: &[f64]| oneform_values(prep.form.as_ref(), p)[i];
        for j in 0..n {
            let mut e = vec![0usize; n];
            e[j] = 1;
            let d = fd_oracle(&bi, x, &e, default_fd_step(x, 1))?;
            fd_form = fd_form.max(rel((d - local.form.db[[i, j]]).abs(), local.form.db[[i, j]].abs()));
            for k in j..n {
                let mut e = vec![0usize; n];
                e[j] += 1;
                e[k] += 1;
                let d = fd_oracle(&bi, x, &e, default_fd_step(x, 2))?;
                let v = local.form.ddb[[i, j, k]];
                fd_form = fd_form.max(rel((d - v).abs(), v.abs()));
            }
        }
    }
    let ft = prep.engine.fundamental_tensor(&local, &sample.y, prep.phi.as_ref())?;
    let metric_at = local.metric.clone();
    let b = local.form.b.clone();
    let phi = prep.phi.clone();
    let half_f2 = move |v: &[f64]| {
        let alpha = metric_at.norm(v);
        let beta: f64 = b.iter().zip(v).map(|(p, q)| p * q).sum();
        let ph = phi.eval(beta / alpha).map(|j| j.phi0).unwrap_or(f64::NAN);
        0.5 * (alpha * ph).powi(2)
    };
    let mut fd_fundamental = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let mut e = vec![0usize; n];
            e[i] += 1;
            e[j] += 1;
            let d = fd_oracle(&half_f2, &sample.y, &e, default_fd_step(&sample.y, 2))?;
            fd_fundamental = fd_fundamental.max(rel((d - ft.g[[i, j]]).abs(), ft.g[[i, j]].abs()));
        }
    }
    Ok((fd_metric, fd_form, fd_fundamental))
}

/// Cross-validate the two spray formulas, the three H-trace routes, and the
/// jets against finite differences.
pub fn xcheck(prep: &Prepared, opts: &VerifyOptions) -> Result<XcheckReport> {
    let (count, seed, _, s_limit) = prep.resolve(opts)?;
    let samples = prep.draw_samples(count, seed, s_limit)?;
    let res = prep.sample_residuals(&samples)?;
    let fd: Vec<(f64, f64, f64)> = samples.par_iter().map(|s| fd_audit(prep, s)).collect::<Result<_>>()?;
    let tolerances = XcheckTolerances { spray: SPRAY_TOL, h: DECOMPOSITION_TOL, fd: FD_TOL };
    let spray = max_of(&res, |r| r.spray);
    let h_tensor = max_of(&res, |r| r.decomposition);
    let h_formula = max_opt(&res, |r| r.h_formula);
    let fd_metric = fd.iter().map(|f| f.0).fold(0.0, f64::max);
    let fd_form = fd.iter().map(|f| f.1).fold(0.0, f64::max);
    let fd_fundamental = fd.iter().map(|f| f.2).fold(0.0, f64::max);
    let passed = spray <= tolerances.spray
        && h_tensor <= tolerances.h
        && h_formula.is_none_or(|h| h <= tolerances.h)
        && fd_metric.max(fd_form).max(fd_fundamental) <= tolerances.fd;
    Ok(XcheckReport {
        schema_version: SCHEMA_VERSION,
        scenario: prep.scenario.name.clone(),
        phi: prep.phi.name(),
        samples: count,
        seed,
        spray,
        h_tensor,
        h_formula,
        fd_metric,
        fd_form,
        fd_fundamental,
        tolerances,
        passed,
    })
}

/// Alpha-curvature tensor data for tests and display.
pub fn alpha_ricci_tensor(prep: &Prepared, x: &[f64]) -> Result<Tensor> {
    let local = prep.local(x)?;
    Ok(alpha_curvature(&local.metric, &local.chr)?.ric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(name: &str) -> (Prepared, VerifyOptions) {
        let prep = find_scenario(name, None).unwrap().prepare().unwrap();
        (prep, VerifyOptions { samples: Some(12), seed: Some(7), delta_s: None })
    }

    #[test]
    fn catalog_shape() {
        let cat = scenario_catalog();
        assert!(cat.len() >= 5);
        let hopf = find_scenario("sphere3_hopf", Some(0.3)).unwrap();
        assert_eq!(hopf.params, TheoremParams { c1: 1.0, c2: 0.0, n: 3, b2: 0.09, tau: 1.0 });
        assert_eq!(find_scenario("euclidean_parallel", None).unwrap().params.tau, 0.0);
        assert!(find_scenario("sphere3_hopf", Some(0.2)).is_err());
        assert!(find_scenario("nope", None).is_err());
        for s in &cat {
            s.validate().unwrap();
        }
    }

    #[test]
    fn samples_are_unit_and_deterministic() {
        let (prep, _) = quick("sphere3_hopf");
        let a = prep.draw_samples(5, 11, 0.25).unwrap();
        let b = prep.draw_samples(5, 11, 0.25).unwrap();
        assert_eq!(a, b);
        for s in &a {
            let local = prep.local(&s.x).unwrap();
            assert!((local.alpha(&s.y) - 1.0).abs() < 1e-12);
            assert!(local.beta(&s.y).abs() <= 0.25);
        }
        assert_ne!(prep.draw_samples(1, 12, 0.25).unwrap()[0], a[0]);
    }

    #[test]
    fn euclidean_report_passes() {
        let (prep, opts) = quick("euclidean_parallel");
        let rep = verify_ricci_flat(&prep, &opts).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert!(rep.conditions.ricci_flat.residual <= 1e-10);
    }

    #[test]
    fn hopf_ode_report_passes() {
        let (prep, opts) = quick("sphere3_hopf");
        let rep = verify_ricci_flat(&prep, &opts).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert!(rep.audits.identities.unwrap().max() <= IDENTITY_TOL);
        assert!(rep.audits.final_display <= FINAL_DISPLAY_TOL);
    }

    #[test]
    fn randers_as_negative_control() {
        let (prep, opts) = quick("sphere3_randers");
        let rep = verify_ricci_flat(&prep, &opts).unwrap();
        assert!(rep.passed, "only (b), (c) are enabled");
        assert!(!rep.conditions.e.pass);
        assert!(rep.conditions.ricci_flat.residual > 1e-2);
        // with the hypotheses failing, the implication holds vacuously
        assert!(rep.implication_holds);
    }

    #[test]
    fn report_is_deterministic() {
        let (prep, opts) = quick("sphere3_hopf_perturbed");
        let a = verify_ricci_flat(&prep, &opts).unwrap();
        let b = verify_ricci_flat(&prep, &opts).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
        assert!(!a.passed);
        assert!(a.conditions.b.residual > 1e-3);
    }

    #[test]
    fn tau_estimates() {
        let (prep, _) = quick("sphere3_riemannian");
        let t = estimate_tau(&prep, &[0.3, -0.2, 0.6]).unwrap();
        assert!((t.tau - 1.0).abs() < 1e-8);
        assert!(t.spread < 1e-8);
        let mut flat = find_scenario("euclidean_parallel", None).unwrap();
        flat.params.c1 = 1.0;
        let t = estimate_tau(&flat.prepare().unwrap(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.tau, 0.0);
        let (prep, _) = quick("euclidean_parallel");
        assert!(estimate_tau(&prep, &[0.0; 3]).is_err());
    }

    #[test]
    fn condition_e_randers_formula() {
        let p = TheoremParams { c1: 1.0, c2: 0.0, n: 3, b2: 1.0, tau: 1.0 };
        let e = check_condition_e(&BuiltinPhi::Randers, &p, 0.9, 181).unwrap();
        assert!((e - 3.99).abs() < 1e-12, "{e}");
        let flat = TheoremParams { c1: 0.0, c2: 0.0, ..p };
        assert_eq!(check_condition_e(&BuiltinPhi::Riemannian, &flat, 0.9, 11).unwrap(), 0.0);
    }

    #[test]
    fn xcheck_on_hopf_randers() {
        let mut sc = find_scenario("sphere3_randers", None).unwrap();
        sc.samples.count = 4;
        let rep = xcheck(&sc.prepare().unwrap(), &VerifyOptions::default()).unwrap();
        assert!(rep.passed, "{rep:#?}");
    }

    #[test]
    fn scenario_json_round_trip() {
        for sc in scenario_catalog() {
            let text = serde_json::to_string(&sc).unwrap();
            let back: Scenario = serde_json::from_str(&text).unwrap();
            assert_eq!(back, sc);
        }
    }

    #[test]
    fn ode_profile_rejected_for_tau_zero() {
        let mut sc = find_scenario("euclidean_parallel", None).unwrap();
        sc.phi = PhiSpec::Ode { q0: 1.0, delta: 0.01, tol: 1e-10 };
        assert!(matches!(sc.validate(), Err(Error::InvalidParams(_))));
    }
}
