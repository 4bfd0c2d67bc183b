//! The Ricci-flat equation for `Q(s)` and a profile `φ` reconstructed from
//! its numerical solution.
//!
//! ```text
//! 0 = (c₁+c₂s²) + (c₁+c₂b²){ 2(s²-b²)/(n-1) (Q' - Q² + sQQ') + Q²b² + 2Qs }
//! ```
//!
//! is first order in `Q`. It is integrated together with `L = ln φ`,
//! `L' = Q/(1+sQ)`, by an adaptive Dormand–Prince 5(4) pair from `s = 0`
//! outward until `|s| = b - δ`.

use std::fmt::{Debug, Write as _};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Layout};
use crate::phi::{convexity_check, ConvexityReport, PhiJet, PhiProfile};

pub const DEFAULT_TOL: f64 = 1e-10;
/// `|1 + sQ|` below this ends an integration as a pole.
pub const POLE_EPS: f64 = 1e-6;
pub const BLOW_UP: f64 = 1e8;
pub const MIN_STEP: f64 = 1e-12;
const MAX_STEPS: usize = 200_000;

/// Constants of the theorem's hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub c1: f64,
    pub c2: f64,
    pub n: usize,
    pub b2: f64,
    pub tau: f64,
}

impl TheoremParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Dimension(self.n));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("b2", self.b2), ("tau", self.tau)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
            }
        }
        if self.b2 < 0.0 {
            return Err(Error::InvalidParams(format!("b2 = {} is negative", self.b2)));
        }
        Ok(())
    }

    /// The extra requirements for the ODE to be nondegenerate.
    pub fn validate_ode(&self) -> Result<()> {
        self.validate()?;
        if self.b2 <= 0.0 {
            return Err(Error::InvalidParams("b2 must be positive for the ODE".into()));
        }
        if self.k().abs() < 1e-14 {
            return Err(Error::InvalidParams(format!("c1 + c2*b2 = {} vanishes", self.k())));
        }
        Ok(())
    }

    /// `c₁ + c₂b²`
    pub fn k(&self) -> f64 {
        self.c1 + self.c2 * self.b2
    }

    pub fn b(&self) -> f64 {
        self.b2.sqrt()
    }

    fn nf(&self) -> f64 {
        self.n as f64 - 1.0
    }
}

/// Left side minus right side of the equation, literally.
pub fn ode_residual(s: f64, q: f64, dq: f64, p: &TheoremParams) -> f64 {
    let core = dq - q * q + s * q * dq;
    (p.c1 + p.c2 * s * s) + p.k() * (2.0 * (s * s - p.b2) / p.nf() * core + q * q * p.b2 + 2.0 * q * s)
}

/// Sum of the absolute values of the terms of [`ode_residual`].
pub fn residual_scale(s: f64, q: f64, dq: f64, p: &TheoremParams) -> f64 {
    let core = dq.abs() + q * q + (s * q * dq).abs();
    (p.c1 + p.c2 * s * s).abs() + p.k().abs() * (2.0 * (s * s - p.b2).abs() / p.nf() * core + q * q * p.b2 + (2.0 * q * s).abs())
}

/// The equation solved for `Q'`.
pub fn ode_rhs(s: f64, q: f64, p: &TheoremParams) -> Result<f64> {
    if s * s >= p.b2 {
        return Err(Error::EndpointSingularity { s });
    }
    let d = 1.0 + s * q;
    if d.abs() < crate::phi::DEGENERACY_EPS {
        return Err(Error::OdePole { s });
    }
    let e = s * s - p.b2;
    let num = (p.c1 + p.c2 * s * s) / p.k() - 2.0 * e * q * q / p.nf() + q * q * p.b2 + 2.0 * q * s;
    Ok(-num / (2.0 * e * d / p.nf()))
}

/// A first-order equation `Q' = f(s, Q)` the solver can integrate.
pub trait QEquation: Debug + Send + Sync {
    fn rhs(&self, s: f64, q: f64) -> Result<f64>;
    /// `f` applied to jets of `s` and `Q`.
    fn rhs_jet(&self, s: &Jet, q: &Jet) -> Result<Jet>;
    /// The equation is singular at `|s| = bound`.
    fn singular_bound(&self) -> f64;
}

impl QEquation for TheoremParams {
    fn rhs(&self, s: f64, q: f64) -> Result<f64> {
        ode_rhs(s, q, self)
    }

    fn rhs_jet(&self, s: &Jet, q: &Jet) -> Result<Jet> {
        self.rhs(s.value(), q.value())?;
        let s2 = s.square();
        let e = s2.add_scalar(-self.b2);
        let q2 = q.square();
        let num = (s2.scale(self.c2).add_scalar(self.c1)).scale(1.0 / self.k()) - (&e * &q2).scale(2.0 / self.nf())
            + q2.scale(self.b2)
            + (s * q).scale(2.0);
        let den = (&e * &(s * q).add_scalar(1.0)).scale(2.0 / self.nf());
        Ok(-num.div(&den))
    }

    fn singular_bound(&self) -> f64 {
        self.b()
    }
}

/// `Q' = 0`, whose solutions are constant. Used to build synthetic solutions
/// with known profiles.
#[derive(Debug, Clone, Copy)]
pub struct Stationary {
    pub bound: f64,
}

impl QEquation for Stationary {
    fn rhs(&self, s: f64, q: f64) -> Result<f64> {
        if (1.0 + s * q).abs() < crate::phi::DEGENERACY_EPS {
            return Err(Error::OdePole { s });
        }
        Ok(0.0)
    }

    fn rhs_jet(&self, s: &Jet, _q: &Jet) -> Result<Jet> {
        Ok(Jet::zero(s.layout()))
    }

    fn singular_bound(&self) -> f64 {
        self.bound
    }
}

/// Why integration in one direction stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Reached { s: f64 },
    Pole { s: f64 },
    BlowUp { s: f64 },
    StepUnderflow { s: f64 },
}

impl Termination {
    pub fn reached(&self) -> bool {
        matches!(self, Termination::Reached { .. })
    }

    pub fn s(&self) -> f64 {
        match *self {
            Termination::Reached { s }
            | Termination::Pole { s }
            | Termination::BlowUp { s }
            | Termination::StepUnderflow { s } => s,
        }
    }
}

/// Solution state at an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Node {
    pub s: f64,
    pub q: f64,
    pub dq: f64,
    pub ddq: f64,
    /// `ln φ` and its first two derivatives
    pub l: f64,
    pub dl: f64,
    pub ddl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub s: f64,
    pub q: f64,
    pub dq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeSolution {
    #[serde(skip)]
    equation: Arc<dyn QEquation>,
    pub q0: f64,
    pub delta: f64,
    pub tol: f64,
    /// Ascending in `s`, containing `s = 0`.
    pub nodes: Vec<Node>,
    pub interval: (f64, f64),
    /// Backward then forward.
    pub terminations: [Termination; 2],
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_step: f64,
}

// Dormand–Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

type State = [f64; 2];

fn deriv(eq: &dyn QEquation, s: f64, y: State) -> Result<State> {
    let dq = eq.rhs(s, y[0])?;
    let d = 1.0 + s * y[0];
    if d.abs() < crate::phi::DEGENERACY_EPS {
        return Err(Error::OdePole { s });
    }
    Ok([dq, y[0] / d])
}

/// One step: fifth-order solution, error estimate, derivative at the new point.
fn dp5_step(eq: &dyn QEquation, s: f64, y: State, k1: State, h: f64) -> Result<(State, State, State)> {
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    for st in 1..7 {
        let mut ys = y;
        for (c, yc) in ys.iter_mut().enumerate() {
            *yc += h * (0..st).map(|j| A[st][j] * k[j][c]).sum::<f64>();
        }
        k[st] = deriv(eq, s + C[st] * h, ys)?;
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for c in 0..2 {
        y5[c] += h * (0..7).map(|j| B5[j] * k[j][c]).sum::<f64>();
        err[c] = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][c]).sum::<f64>();
    }
    Ok((y5, err, k[6]))
}

/// `Q''` from the chain rule on `f`.
fn second_derivative(eq: &dyn QEquation, s: f64, q: f64) -> Result<f64> {
    let layout = Layout::new(2, 1);
    let f = eq.rhs_jet(&Jet::variable(&layout, 0, s), &Jet::variable(&layout, 1, q))?;
    Ok(f.partial_vars(&[0]) + f.partial_vars(&[1]) * f.value())
}

fn make_node(eq: &dyn QEquation, s: f64, y: State, f: State) -> Result<Node> {
    let ddq = second_derivative(eq, s, y[0])?;
    let d = 1.0 + s * y[0];
    Ok(Node { s, q: y[0], dq: f[0], ddq, l: y[1], dl: f[1], ddl: (f[0] - y[0] * y[0]) / (d * d) })
}

struct Leg {
    nodes: Vec<Node>,
    termination: Termination,
    accepted: usize,
    rejected: usize,
}

fn integrate_leg(eq: &dyn QEquation, q0: f64, target: f64, opts: &SolverOptions) -> Result<Leg> {
    let dir = target.signum();
    let mut s = 0.0;
    let mut y: State = [q0, 0.0];
    let mut f = deriv(eq, s, y)?;
    let mut nodes = vec![make_node(eq, s, y, f)?];
    let mut h = opts.max_step.min(0.01 * target.abs());
    let (mut accepted, mut rejected) = (0, 0);
    let termination = loop {
        if (target - s) * dir <= 0.0 {
            break Termination::Reached { s };
        }
        if accepted + rejected > MAX_STEPS || h < MIN_STEP {
            break Termination::StepUnderflow { s };
        }
        let last = (target - s).abs() <= h;
        let step = if last { target - s } else { dir * h };
        let trial = dp5_step(eq, s, y, f, step);
        let (y_new, err, f_new) = match trial {
            Ok(t) => t,
            Err(Error::OdePole { .. }) | Err(Error::EndpointSingularity { .. }) => {
                rejected += 1;
                h *= 0.25;
                continue;
            }
            Err(e) => return Err(e),
        };
        let norm = err
            .iter()
            .zip(y.iter().zip(&y_new))
            .map(|(e, (a, b))| e.abs() / (opts.tol * a.abs().max(b.abs()).max(1.0)))
            .fold(0.0, f64::max);
        if !norm.is_finite() || norm > 1.0 {
            rejected += 1;
            let fac = if norm.is_finite() { (0.9 * norm.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= fac;
            continue;
        }
        accepted += 1;
        s = if last { target } else { s + step };
        y = y_new;
        f = f_new;
        nodes.push(make_node(eq, s, y, f)?);
        if (1.0 + s * y[0]).abs() < POLE_EPS {
            break Termination::Pole { s };
        }
        if y[0].abs() > BLOW_UP {
            break Termination::BlowUp { s };
        }
        let fac = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h = (step.abs() * fac).min(opts.max_step);
    };
    Ok(Leg { nodes, termination, accepted, rejected })
}

/// Integrate an arbitrary [`QEquation`] from `Q(0) = q0` out to
/// `|s| = bound - delta` in both directions.
pub fn solve_equation(eq: Arc<dyn QEquation>, q0: f64, delta: f64, opts: SolverOptions) -> Result<OdeSolution> {
    if !(delta > 0.0) || !(opts.tol > 0.0) || !(opts.max_step > 0.0) || !q0.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need delta > 0, tol > 0, max_step > 0 and finite q0; got delta = {delta}, tol = {}, max_step = {}, q0 = {q0}",
            opts.tol, opts.max_step
        )));
    }
    let reach = eq.singular_bound() - delta;
    if !(reach > 0.0) {
        return Err(Error::InvalidParams(format!("delta = {delta} leaves no interval inside |s| < {}", eq.singular_bound())));
    }
    let back = integrate_leg(eq.as_ref(), q0, -reach, &opts)?;
    let fwd = integrate_leg(eq.as_ref(), q0, reach, &opts)?;
    let mut nodes: Vec<Node> = back.nodes.into_iter().rev().collect();
    nodes.extend(fwd.nodes.into_iter().skip(1));
    let interval = (nodes[0].s, nodes[nodes.len() - 1].s);
    Ok(OdeSolution {
        equation: eq,
        q0,
        delta,
        tol: opts.tol,
        nodes,
        interval,
        terminations: [back.termination, fwd.termination],
        accepted_steps: back.accepted + fwd.accepted,
        rejected_steps: back.rejected + fwd.rejected,
    })
}

/// Solve the Ricci-flat equation with grid spacing at most `b/200`.
pub fn solve_q(params: &TheoremParams, q0: f64, delta: f64, tol: f64) -> Result<OdeSolution> {
    params.validate_ode()?;
    let opts = SolverOptions { tol, max_step: params.b() / 200.0 };
    solve_equation(Arc::new(*params), q0, delta, opts)
}

fn cubic_hermite(a: &Node, b: &Node, s: f64) -> (f64, f64) {
    let h = b.s - a.s;
    let t = (s - a.s) / h;
    let (t2, t3) = (t * t, t * t * t);
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * a.q
        + (t3 - 2.0 * t2 + t) * h * a.dq
        + (-2.0 * t3 + 3.0 * t2) * b.q
        + (t3 - t2) * h * b.dq;
    let d = ((6.0 * t2 - 6.0 * t) * a.q
        + (3.0 * t2 - 4.0 * t + 1.0) * h * a.dq
        + (-6.0 * t2 + 6.0 * t) * b.q
        + (3.0 * t2 - 2.0 * t) * h * b.dq)
        / h;
    (v, d)
}

/// Quintic Hermite interpolation from values and two derivatives at both
/// ends; returns the value and first derivative.
fn quintic_hermite(s0: f64, s1: f64, p0: [f64; 3], p1: [f64; 3], s: f64) -> (f64, f64) {
    let h = s1 - s0;
    let t = (s - s0) / h;
    let (t2, t3, t4, t5) = (t * t, t.powi(3), t.powi(4), t.powi(5));
    let basis = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
        0.5 * t3 - t4 + 0.5 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
    ];
    let dbasis = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
        1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
    ];
    let w = [p0[0], h * p0[1], h * h * p0[2], h * h * p1[2], h * p1[1], p1[0]];
    let v = (0..6).map(|i| basis[i] * w[i]).sum();
    let d = (0..6).map(|i| dbasis[i] * w[i]).sum::<f64>() / h;
    (v, d)
}

impl OdeSolution {
    pub fn equation(&self) -> &Arc<dyn QEquation> {
        &self.equation
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        self.nodes.iter().map(|n| GridPoint { s: n.s, q: n.q, dq: n.dq }).collect()
    }

    pub fn reached_both(&self) -> bool {
        self.terminations.iter().all(Termination::reached)
    }

    fn segment(&self, s: f64) -> Result<(&Node, &Node)> {
        let (lo, hi) = self.interval;
        if !(s >= lo && s <= hi) || self.nodes.len() < 2 {
            return Err(Error::OutsideDomain { s, lo, hi });
        }
        let k = self.nodes.partition_point(|n| n.s <= s).clamp(1, self.nodes.len() - 1);
        Ok((&self.nodes[k - 1], &self.nodes[k]))
    }

    /// `(Q, Q')` from the cubic Hermite interpolant.
    pub fn q_cubic(&self, s: f64) -> Result<(f64, f64)> {
        let (a, b) = self.segment(s)?;
        Ok(cubic_hermite(a, b, s))
    }

    /// `(Q, Q')` from the quintic Hermite interpolant.
    pub fn q_at(&self, s: f64) -> Result<(f64, f64)> {
        let (a, b) = self.segment(s)?;
        Ok(quintic_hermite(a.s, b.s, [a.q, a.dq, a.ddq], [b.q, b.dq, b.ddq], s))
    }

    /// `ln φ` from the quintic Hermite interpolant.
    pub fn ln_phi_at(&self, s: f64) -> Result<f64> {
        let (a, b) = self.segment(s)?;
        Ok(quintic_hermite(a.s, b.s, [a.l, a.dl, a.ddl], [b.l, b.dl, b.ddl], s).0)
    }

    /// Largest step between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1].s - w[0].s).fold(0.0, f64::max)
    }

    /// Largest equation residual of the stored nodes at the given parameters.
    pub fn node_residual(&self, params: &TheoremParams) -> f64 {
        self.nodes.iter().map(|n| ode_residual(n.s, n.q, n.dq, params).abs()).fold(0.0, f64::max)
    }

    /// Largest residual of the dense interpolant at the midpoints and
    /// quarter points of every step, relative to the size of the terms of
    /// the equation there.
    pub fn dense_residual(&self, params: &TheoremParams) -> f64 {
        let mut worst = 0.0f64;
        for w in self.nodes.windows(2) {
            for frac in [0.25, 0.5, 0.75] {
                let s = w[0].s + frac * (w[1].s - w[0].s);
                let (q, dq) = quintic_hermite(w[0].s, w[1].s, [w[0].q, w[0].dq, w[0].ddq], [w[1].q, w[1].dq, w[1].ddq], s);
                worst = worst.max(ode_residual(s, q, dq, params).abs() / residual_scale(s, q, dq, params));
            }
        }
        worst
    }
}

/// Outcome of the step-halving order check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RichardsonReport {
    pub s_end: f64,
    pub h: f64,
    pub err_h: f64,
    pub err_half: f64,
    /// `err_half / err_h`
    pub ratio: f64,
    /// `log₂(err_h / err_half)`
    pub order: f64,
}

fn fixed_step_q(eq: &dyn QEquation, q0: f64, s_end: f64, steps: usize) -> Result<f64> {
    let h = s_end / steps as f64;
    let mut y: State = [q0, 0.0];
    let mut s = 0.0;
    let mut f = deriv(eq, s, y)?;
    for i in 0..steps {
        let (y5, _, f5) = dp5_step(eq, s, y, f, h)?;
        y = y5;
        f = f5;
        s = (i + 1) as f64 * h;
    }
    Ok(y[0])
}

/// Compare fixed-step runs with `steps` and `2·steps` steps against a
/// reference adaptive run at `tol = 1e-12`.
pub fn richardson_check(params: &TheoremParams, q0: f64, s_end: f64, steps: usize) -> Result<RichardsonReport> {
    params.validate_ode()?;
    if !(s_end.abs() < params.b()) || steps == 0 {
        return Err(Error::InvalidParams(format!("s_end = {s_end} outside |s| < {}", params.b())));
    }
    let eq = Arc::new(*params) as Arc<dyn QEquation>;
    let opts = SolverOptions { tol: 1e-12, max_step: params.b() / 400.0 };
    let reference = {
        let leg = integrate_leg(eq.as_ref(), q0, s_end, &opts)?;
        if !leg.termination.reached() {
            return Err(Error::OdePole { s: leg.termination.s() });
        }
        leg.nodes.last().expect("nonempty").q
    };
    let err_h = (fixed_step_q(eq.as_ref(), q0, s_end, steps)? - reference).abs();
    let err_half = (fixed_step_q(eq.as_ref(), q0, s_end, 2 * steps)? - reference).abs();
    Ok(RichardsonReport {
        s_end,
        h: s_end / steps as f64,
        err_h,
        err_half,
        ratio: err_half / err_h,
        order: (err_h / err_half).log2(),
    })
}

/// A profile built from a numerical solution: `φ(0) = 1`,
/// `ln φ(s) = ∫₀ˢ Q/(1+uQ) du`.
///
/// At each `s` the value of `Q` comes from the dense interpolant; higher
/// derivatives come from the Taylor expansion of the equation itself about
/// that point, so the returned jet satisfies the ODE to roundoff.
#[derive(Debug, Clone)]
pub struct OdePhi {
    solution: Arc<OdeSolution>,
    layout: Arc<Layout>,
}

pub fn phi_from_q(solution: OdeSolution) -> Result<OdePhi> {
    let (lo, hi) = solution.interval;
    let min_len = 2.0 * solution.max_spacing().max(f64::EPSILON);
    if solution.nodes.len() < 3 || hi - lo < min_len {
        return Err(Error::IntervalTooShort { lo, hi });
    }
    for n in &solution.nodes {
        if (1.0 + n.s * n.q).abs() < POLE_EPS {
            return Err(Error::OdePole { s: n.s });
        }
    }
    Ok(OdePhi { solution: Arc::new(solution), layout: Layout::new(1, 4) })
}

impl OdePhi {
    pub fn solution(&self) -> &OdeSolution {
        &self.solution
    }

    /// Taylor expansion of `Q` about `s` seeded with `Q(s) = q`.
    fn q_jet(&self, s: f64, q: f64) -> Result<(Jet, Jet)> {
        let eq = self.solution.equation.as_ref();
        let sj = Jet::variable(&self.layout, 0, s);
        let mut qj = Jet::constant(&self.layout, q);
        for _ in 0..=self.layout.order() {
            qj = eq.rhs_jet(&sj, &qj)?.antiderivative(0).add_scalar(q);
        }
        Ok((sj, qj))
    }

    /// CSV of the solution grid: `s,Q,dQ,phi,dphi,ddphi`.
    pub fn csv(&self) -> Result<String> {
        let mut out = String::from("s,Q,dQ,phi,dphi,ddphi\n");
        for n in &self.solution.nodes {
            let j = self.jet_at_node(n)?;
            writeln!(out, "{},{},{},{},{},{}", n.s, n.q, n.dq, j.phi0, j.phi1, j.phi2).expect("write to string");
        }
        Ok(out)
    }

    fn jet_at_node(&self, n: &Node) -> Result<PhiJet> {
        self.jet_from(n.s, n.q, n.l)
    }

    fn jet_from(&self, s: f64, q: f64, l0: f64) -> Result<PhiJet> {
        let (sj, qj) = self.q_jet(s, q)?;
        let w = qj.div(&(&sj * &qj).add_scalar(1.0));
        let phi = w.antiderivative(0).add_scalar(l0).exp();
        let d: Vec<f64> = (0..5).map(|k| phi.partial(&[k as u8])).collect();
        Ok(PhiJet { s, phi0: d[0], phi1: d[1], phi2: d[2], phi3: d[3], phi4: d[4] })
    }
}

impl PhiProfile for OdePhi {
    fn name(&self) -> String {
        format!("ode(q0={})", self.solution.q0)
    }

    fn domain(&self) -> (f64, f64) {
        self.solution.interval
    }

    fn eval(&self, s: f64) -> Result<PhiJet> {
        let (q, _) = self.solution.q_at(s)?;
        let l0 = if s == 0.0 { 0.0 } else { self.solution.ln_phi_at(s)? };
        self.jet_from(s, q, l0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Q0ScanEntry {
    pub q0: f64,
    pub interval: Option<(f64, f64)>,
    pub reached: bool,
    pub convexity: Option<ConvexityReport>,
    pub error: Option<String>,
}

/// Solve for each `q0` in parallel and report the achieved interval and the
/// convexity scan of the reconstructed profile over it.
pub fn scan_q0(params: &TheoremParams, q0s: &[f64], delta: f64, tol: f64) -> Vec<Q0ScanEntry> {
    q0s.par_iter()
        .map(|&q0| {
            let run = || -> Result<(OdeSolution, ConvexityReport)> {
                let sol = solve_q(params, q0, delta, tol)?;
                let phi = phi_from_q(sol.clone())?;
                let conv = convexity_check(&phi, params.b(), 201)?;
                Ok((sol, conv))
            };
            match run() {
                Ok((sol, conv)) => Q0ScanEntry {
                    q0,
                    interval: Some(sol.interval),
                    reached: sol.reached_both(),
                    convexity: Some(conv),
                    error: None,
                },
                Err(e) => Q0ScanEntry { q0, interval: None, reached: false, convexity: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}
