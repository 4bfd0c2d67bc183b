use riccflat_web::{curvature_at, ricci_scan, solve_phi};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).expect("valid JSON")
}

#[test]
fn solve_phi_returns_grid() {
    let v = parse(solve_phi(1.0, 0.0, 3, 0.09, 1.0, 0.01));
    assert!(v.get("error").is_none(), "{v}");
    let s = v["s"].as_array().unwrap();
    assert_eq!(s.len(), v["phi"].as_array().unwrap().len());
    assert!((v["interval"][1].as_f64().unwrap() - 0.29).abs() < 1e-9);
    assert_eq!(v["reached"], true);
}

#[test]
fn solve_phi_reports_bad_params() {
    let v = parse(solve_phi(1.0, 0.0, 3, 0.0, 1.0, 0.01));
    assert!(v["error"].as_str().unwrap().contains("b2"));
}

#[test]
fn ricci_scan_separates_ode_from_randers() {
    let ode = parse(ricci_scan(0.3, "ode", 1.0, 20, 1));
    let randers = parse(ricci_scan(0.3, "randers", 1.0, 20, 1));
    assert_eq!(ode["points"].as_array().unwrap().len(), 20);
    assert!(ode["max"]["ricci"].as_f64().unwrap() < 1e-8);
    assert!(randers["max"]["ricci"].as_f64().unwrap() > 1e-2);
}

#[test]
fn curvature_at_matches_round_sphere() {
    let v = parse(curvature_at(0.3, "riemannian", 0.0, vec![0.1, 0.2, -0.3], vec![1.0, 0.0, 0.5]));
    let alpha = v["alpha"].as_f64().unwrap();
    let ric = v["curvature"]["ric"].as_f64().unwrap();
    assert!((ric - 2.0 * alpha * alpha).abs() < 1e-10 * ric);
}

#[test]
fn curvature_at_rejects_bad_input() {
    assert!(parse(curvature_at(0.3, "ode", 1.0, vec![0.1], vec![1.0, 0.0, 0.0])).get("error").is_some());
    assert!(parse(curvature_at(0.3, "bogus", 1.0, vec![0.0; 3], vec![1.0, 0.0, 0.0])).get("error").is_some());
}
