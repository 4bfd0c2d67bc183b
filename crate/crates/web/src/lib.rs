//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string: the payload on success, `{"error": "..."}` otherwise.

use riccflat::ode::{phi_from_q, solve_q, TheoremParams};
use riccflat::phi::{convexity_check, BuiltinPhi, PhiProfile};
use riccflat::verify::{sphere3_hopf, PhiSpec, Prepared, Scenario};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn hopf_scenario(eps: f64, phi: &str, q0: f64) -> Result<Scenario, String> {
    let mut sc = sphere3_hopf(eps);
    sc.phi = match phi {
        "ode" => PhiSpec::Ode { q0, delta: 0.01, tol: 1e-10 },
        key => PhiSpec::Builtin { model: BuiltinPhi::from_key(key).ok_or_else(|| format!("unknown phi `{key}`"))? },
    };
    Ok(sc)
}

fn prepare(eps: f64, phi: &str, q0: f64) -> Result<Prepared, String> {
    hopf_scenario(eps, phi, q0)?.prepare().map_err(|e| e.to_string())
}

fn solve_inner(c1: f64, c2: f64, n: u32, b2: f64, q0: f64, delta: f64) -> Result<Value, String> {
    let params = TheoremParams { c1, c2, n: n as usize, b2, tau: 1.0 };
    params.validate_ode().map_err(|e| e.to_string())?;
    let sol = solve_q(&params, q0, delta, 1e-10).map_err(|e| e.to_string())?;
    let phi = phi_from_q(sol.clone()).map_err(|e| e.to_string())?;
    let (mut s, mut q, mut dq, mut f, mut df) = (vec![], vec![], vec![], vec![], vec![]);
    for node in &sol.nodes {
        let j = phi.eval(node.s).map_err(|e| e.to_string())?;
        s.push(node.s);
        q.push(node.q);
        dq.push(node.dq);
        f.push(j.phi0);
        df.push(j.phi1);
    }
    let conv = convexity_check(&phi, params.b(), 201).map_err(|e| e.to_string())?;
    Ok(json!({
        "interval": sol.interval,
        "reached": sol.reached_both(),
        "terminations": sol.terminations,
        "node_residual": sol.node_residual(&params),
        "convexity": conv,
        "s": s, "q": q, "dq": dq, "phi": f, "dphi": df,
    }))
}

/// Integrate the Ricci-flat equation with `Q(0) = q0` and return the grid
/// of `s, Q, Q', φ, φ'` with the achieved interval and convexity scan.
#[wasm_bindgen]
pub fn solve_phi(c1: f64, c2: f64, n: u32, b2: f64, q0: f64, delta: f64) -> String {
    respond(solve_inner(c1, c2, n, b2, q0, delta))
}

fn scan_inner(eps: f64, phi: &str, q0: f64, samples: u32, seed: u32) -> Result<Value, String> {
    let prep = prepare(eps, phi, q0)?;
    let limit = prep.s_limit(0.02 * eps);
    let draws = prep.draw_samples(samples.max(1) as usize, seed as u64, limit).map_err(|e| e.to_string())?;
    let mut points = Vec::with_capacity(draws.len());
    let mut worst = json!({ "a": 0.0, "b": 0.0, "c": 0.0, "d": 0.0, "ricci": 0.0 });
    for d in &draws {
        let r = prep.evaluate(&d.x, &d.y).map_err(|e| e.to_string())?;
        points.push(json!([r.s, r.ricci]));
        for (k, v) in [("a", r.a), ("b", r.b), ("c", r.c), ("d", r.d), ("ricci", r.ricci)] {
            worst[k] = json!(worst[k].as_f64().unwrap_or(0.0).max(v));
        }
    }
    Ok(json!({ "phi": prep.phi.name(), "s_limit": limit, "points": points, "max": worst }))
}

/// Sample `(x, y)` on the Hopf 3-sphere and return `(s, |Ric|/α²)` pairs
/// for the chosen profile along with the worst hypothesis residuals.
#[wasm_bindgen]
pub fn ricci_scan(eps: f64, phi: &str, q0: f64, samples: u32, seed: u32) -> String {
    respond(scan_inner(eps, phi, q0, samples, seed))
}

fn curvature_inner(eps: f64, phi: &str, q0: f64, x: &[f64], y: &[f64]) -> Result<Value, String> {
    let prep = prepare(eps, phi, q0)?;
    let rep = prep.curvature_at(x, y).map_err(|e| e.to_string())?;
    serde_json::to_value(rep).map_err(|e| e.to_string())
}

/// `α, β, s, F, G^i, Ric, ᵅRic, H^i_i` at one point and direction.
#[wasm_bindgen]
pub fn curvature_at(eps: f64, phi: &str, q0: f64, x: Vec<f64>, y: Vec<f64>) -> String {
    respond(curvature_inner(eps, phi, q0, &x, &y))
}
