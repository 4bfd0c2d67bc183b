//! Profiles `φ(s)` of an (α,β)-metric `F = α φ(β/α)` and the scalar
//! coefficients of its closed-form spray.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold below which `φ - sφ'` or `Δ` count as zero.
pub const DEGENERACY_EPS: f64 = 1e-12;

/// `φ` and its first four derivatives at `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiJet {
    pub s: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
}

impl PhiJet {
    pub fn derivatives(&self) -> [f64; 5] {
        [self.phi0, self.phi1, self.phi2, self.phi3, self.phi4]
    }
}

/// A smooth positive profile with derivatives up to order four.
pub trait PhiProfile: Debug + Send + Sync {
    fn name(&self) -> String;
    /// Open interval on which the profile is defined.
    fn domain(&self) -> (f64, f64);
    /// Unchecked evaluation; callers go through [`phi_jet`].
    fn eval(&self, s: f64) -> Result<PhiJet>;
}

/// The builtin test profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinPhi {
    /// `φ = 1`, i.e. `F = α`.
    Riemannian,
    /// `φ = 1 + s`, i.e. `F = α + β`.
    Randers,
    /// `φ = 1 + s²`.
    Quadratic,
}

impl BuiltinPhi {
    pub const ALL: [BuiltinPhi; 3] = [BuiltinPhi::Riemannian, BuiltinPhi::Randers, BuiltinPhi::Quadratic];

    pub fn key(&self) -> &'static str {
        match self {
            BuiltinPhi::Riemannian => "riemannian",
            BuiltinPhi::Randers => "randers",
            BuiltinPhi::Quadratic => "quadratic",
        }
    }

    pub fn formula(&self) -> &'static str {
        match self {
            BuiltinPhi::Riemannian => "phi(s) = 1",
            BuiltinPhi::Randers => "phi(s) = 1 + s",
            BuiltinPhi::Quadratic => "phi(s) = 1 + s^2",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.key() == key)
    }
}

impl PhiProfile for BuiltinPhi {
    fn name(&self) -> String {
        self.key().to_string()
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn eval(&self, s: f64) -> Result<PhiJet> {
        let (phi0, phi1, phi2) = match self {
            BuiltinPhi::Riemannian => (1.0, 0.0, 0.0),
            BuiltinPhi::Randers => (1.0 + s, 1.0, 0.0),
            BuiltinPhi::Quadratic => (1.0 + s * s, 2.0 * s, 2.0),
        };
        Ok(PhiJet { s, phi0, phi1, phi2, phi3: 0.0, phi4: 0.0 })
    }
}

/// Evaluate a profile, rejecting points outside its domain and poles of `Q`.
pub fn phi_jet(model: &dyn PhiProfile, s: f64) -> Result<PhiJet> {
    let (lo, hi) = model.domain();
    if !(s > lo && s < hi) {
        return Err(Error::OutsideDomain { s, lo, hi });
    }
    let jet = model.eval(s)?;
    if (jet.phi0 - s * jet.phi1).abs() < DEGENERACY_EPS {
        return Err(Error::QPole { s });
    }
    Ok(jet)
}

/// `Q = φ'/(φ - sφ')`, its derivatives, and the closed-form spray
/// coefficients `Θ`, `Ψ`, `Δ` at a given `b²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QData {
    pub s: f64,
    pub b2: f64,
    pub q: f64,
    pub dq: f64,
    pub ddq: f64,
    pub theta: f64,
    pub psi: f64,
    pub delta: f64,
}

pub fn q_data(jet: &PhiJet, b2: f64) -> Result<QData> {
    let PhiJet { s, phi0, phi1, phi2, phi3, .. } = *jet;
    let d = phi0 - s * phi1;
    if d.abs() < DEGENERACY_EPS {
        return Err(Error::QPole { s });
    }
    // with D = φ - sφ' and D' = -sφ'':  Q' = φφ''/D²
    let q = phi1 / d;
    let dq = phi0 * phi2 / (d * d);
    let ddq = (phi1 * phi2 + phi0 * phi3) / (d * d) + 2.0 * s * phi0 * phi2 * phi2 / (d * d * d);
    let delta = 1.0 + s * q + (b2 - s * s) * dq;
    if delta.abs() < DEGENERACY_EPS {
        return Err(Error::DeltaDegenerate { s });
    }
    Ok(QData { s, b2, q, dq, ddq, theta: (q - s * dq) / (2.0 * delta), psi: dq / (2.0 * delta), delta })
}

/// Outcome of the strong-convexity scan
/// `φ(s) > 0` and `φ(s) - sφ'(s) + (ρ² - s²)φ''(s) > 0` for `|s| ≤ ρ ≤ b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub ok: bool,
    /// `min(min φ, min second expression)` over the scanned region.
    pub worst_margin: f64,
    pub worst_s: f64,
    pub worst_rho: f64,
    pub min_phi: f64,
    pub min_second: f64,
    /// Whether the whole of `[-b, b]` lies in the profile's domain; when it
    /// does not, only the intersection is scanned and `ok` is false.
    pub covered: bool,
    /// `[s_lo, s_hi]` actually scanned.
    pub scanned: (f64, f64),
}

pub fn convexity_check(model: &dyn PhiProfile, b: f64, grid_size: usize) -> Result<ConvexityReport> {
    if !(b >= 0.0) {
        return Err(Error::InvalidParams(format!("b = {b} must be non-negative")));
    }
    let grid_size = grid_size.max(2);
    let (lo, hi) = model.domain();
    let s_lo = (-b).max(next_inside(lo, 1.0));
    let s_hi = b.min(next_inside(hi, -1.0));
    let covered = s_lo == -b && s_hi == b;
    let mut rep = ConvexityReport {
        ok: true,
        worst_margin: f64::INFINITY,
        worst_s: 0.0,
        worst_rho: 0.0,
        min_phi: f64::INFINITY,
        min_second: f64::INFINITY,
        covered,
        scanned: (s_lo, s_hi),
    };
    for k in 0..grid_size {
        let s = s_lo + (s_hi - s_lo) * k as f64 / (grid_size - 1) as f64;
        let jet = model.eval(s)?;
        if jet.phi0 < rep.worst_margin {
            rep.worst_margin = jet.phi0;
            rep.worst_s = s;
            rep.worst_rho = s.abs();
        }
        rep.min_phi = rep.min_phi.min(jet.phi0);
        // Affine in ρ², so the extremes over ρ ∈ [|s|, b] sit at the ends.
        for rho in [s.abs(), b] {
            let m = jet.phi0 - s * jet.phi1 + (rho * rho - s * s) * jet.phi2;
            rep.min_second = rep.min_second.min(m);
            if m < rep.worst_margin {
                rep.worst_margin = m;
                rep.worst_s = s;
                rep.worst_rho = rho;
            }
        }
    }
    rep.ok = covered && rep.worst_margin > 0.0;
    Ok(rep)
}

fn next_inside(edge: f64, dir: f64) -> f64 {
    if edge.is_finite() {
        edge + dir * 1e-12 * edge.abs().max(1.0)
    } else {
        edge
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_jets() {
        let j = phi_jet(&BuiltinPhi::Randers, 0.2).unwrap();
        assert_eq!(j.derivatives(), [1.2, 1.0, 0.0, 0.0, 0.0]);
        let j = phi_jet(&BuiltinPhi::Riemannian, -0.7).unwrap();
        assert_eq!(j.derivatives(), [1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn randers_q_data() {
        for s in [-0.5, 0.0, 0.3] {
            let qd = q_data(&phi_jet(&BuiltinPhi::Randers, s).unwrap(), 1.0).unwrap();
            assert_eq!(qd.q, 1.0);
            assert_eq!(qd.dq, 0.0);
            assert!((qd.delta - (1.0 + s)).abs() < 1e-15);
            assert!((qd.theta - 0.5 / (1.0 + s)).abs() < 1e-15);
            assert_eq!(qd.psi, 0.0);
        }
    }

    #[test]
    fn riemannian_q_data() {
        let qd = q_data(&phi_jet(&BuiltinPhi::Riemannian, 0.4).unwrap(), 0.5).unwrap();
        assert_eq!((qd.q, qd.theta, qd.psi, qd.delta), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn randers_pole_at_minus_one_is_not_a_q_pole() {
        // φ - sφ' = 1 for Randers, so Q is finite even where φ vanishes.
        assert!(phi_jet(&BuiltinPhi::Randers, -1.0).is_ok());
        // Quadratic: φ - sφ' = 1 - s², a pole at s = ±1.
        assert_eq!(phi_jet(&BuiltinPhi::Quadratic, 1.0), Err(Error::QPole { s: 1.0 }));
    }

    #[test]
    fn delta_degeneracy_is_reported() {
        // Randers with s = -1: Δ = 1 + s = 0.
        let j = PhiJet { s: -1.0, phi0: 0.0, phi1: 1.0, phi2: 0.0, phi3: 0.0, phi4: 0.0 };
        assert_eq!(q_data(&j, 1.0), Err(Error::DeltaDegenerate { s: -1.0 }));
    }

    #[test]
    fn convexity_examples() {
        let ok = convexity_check(&BuiltinPhi::Randers, 0.9, 181).unwrap();
        assert!(ok.ok);
        assert!((ok.min_second - 1.0).abs() < 1e-15);
        assert!((ok.min_phi - 0.1).abs() < 1e-12);
        let bad = convexity_check(&BuiltinPhi::Randers, 1.2, 241).unwrap();
        assert!(!bad.ok);
        assert!(bad.worst_s <= -1.0);
        let quad = convexity_check(&BuiltinPhi::Quadratic, 0.9, 101).unwrap();
        assert!(quad.ok);
        // 1 - 3s² + 2ρ² is smallest at s = ρ = b
        assert!((quad.min_second - (1.0 - 0.81)).abs() < 1e-12);
    }
}
