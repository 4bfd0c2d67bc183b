use std::process::{Command, Output};

fn riccflat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riccflat")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn catalog_lists_scenarios() {
    let o = riccflat(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sphere3_hopf"));
    let j = json(&riccflat(&["catalog", "--format", "json"]));
    let names: Vec<&str> = j["scenarios"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    for want in ["euclidean_parallel", "sphere3_hopf", "sphere3_hopf_perturbed", "sphere3_randers"] {
        assert!(names.contains(&want), "{want}");
    }
    assert_eq!(j["phi_models"].as_array().unwrap().len(), 4);
}

#[test]
fn compute_euclidean_is_flat() {
    let o = riccflat(&["compute", "--scenario", "euclidean_parallel", "--point=-0.4,0.2,1", "--direction", "0.3,1,-2", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = json(&o);
    assert!(j["point"]["curvature"]["ric"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn compute_round_sphere_gives_twice_alpha_squared() {
    let o = riccflat(&["compute", "--scenario", "sphere3_riemannian", "--point", "0.2,0.1,-0.3", "--direction", "0,1,1", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p = &json(&o)["point"];
    let alpha = p["alpha"].as_f64().unwrap();
    let ric = p["curvature"]["ric"].as_f64().unwrap();
    assert!((ric - 2.0 * alpha * alpha).abs() < 1e-10 * ric);
}

#[test]
fn compute_text_values_appear_in_json() {
    let args = ["compute", "--scenario", "sphere3_hopf", "--point", "0.1,0.2,0.3", "--direction", "1,0.5,0"];
    let text = stdout(&riccflat(&args));
    let j = json(&riccflat(&[&args[..], &["--json"]].concat()));
    let line = text.lines().find(|l| l.starts_with("Ric = ")).unwrap();
    let v: f64 = line["Ric = ".len()..].parse().unwrap();
    assert_eq!(v, j["point"]["curvature"]["ric"].as_f64().unwrap());
}

#[test]
fn compute_bad_point_length_is_config_error() {
    let o = riccflat(&["compute", "--scenario", "euclidean_parallel", "--point", "0.1,0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("components"));
}

#[test]
fn compute_zero_direction_is_degenerate() {
    let o = riccflat(&["compute", "--scenario", "sphere3_randers", "--direction", "0,0,0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_phi_reaches_near_b() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("q.csv");
    let o = riccflat(&["solve-phi", "--c1", "1", "--c2", "0", "--n", "3", "--b2", "0.09", "--q0", "1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,Q,dQ,phi,dphi,ddphi"));
    let s: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(s.iter().cloned().fold(0.0, f64::max) >= 0.29 - 1e-9);
    assert!(s.iter().cloned().fold(0.0, f64::min) <= -0.29 + 1e-9);
    assert!(stdout(&o).contains("interval"));
    assert!(stdout(&o).contains("convexity"));
}

#[test]
fn solve_phi_zero_q0_slope() {
    let o = riccflat(&["solve-phi", "--b2", "0.09", "--q0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().skip(1).find(|l| l.starts_with("0,")).expect("s = 0 row");
    let dq: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    // (n-1)/(2 b^2) c1/(c1 + c2 b^2)
    assert!((dq - 2.0 / 0.18).abs() < 1e-9, "{dq}");
}

#[test]
fn solve_phi_zero_b2_is_config_error() {
    assert_eq!(riccflat(&["solve-phi", "--b2", "0"]).status.code(), Some(2));
}

#[test]
fn solve_phi_scan_tabulates() {
    let o = riccflat(&["solve-phi", "--scan-q0=-1,0,1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o).as_array().unwrap().len(), 3);
}

#[test]
fn verify_euclidean_passes() {
    assert_eq!(riccflat(&["verify", "--scenario", "euclidean_parallel"]).status.code(), Some(0));
}

#[test]
fn verify_flagship_passes() {
    let o = riccflat(&["verify", "--scenario", "sphere3_hopf", "--eps", "0.3", "--phi", "ode", "--q0", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(json(&o)["conditions"]["ricci_flat"]["residual"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn verify_randers_fails_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = riccflat(&["verify", "--scenario", "sphere3_hopf", "--phi", "randers", "--samples", "30", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["conditions"]["e"]["pass"], false);
}

#[test]
fn verify_is_deterministic_for_a_seed() {
    let run = || {
        let mut j = json(&riccflat(&["verify", "--scenario", "sphere3_hopf", "--samples", "20", "--seed", "11", "--json"]));
        j.as_object_mut().unwrap().remove("timing");
        serde_json::to_string(&j).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn verify_threads_flag_is_accepted() {
    let o = riccflat(&["--threads", "2", "verify", "--scenario", "euclidean_parallel", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unknown_scenario_is_config_error() {
    assert_eq!(riccflat(&["verify", "--scenario", "nope"]).status.code(), Some(2));
}

#[test]
fn xcheck_perturbed_spray_still_agrees() {
    let o = riccflat(&["xcheck", "--scenario", "sphere3_hopf_perturbed", "--samples", "10", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(json(&o)["spray"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn xcheck_euclidean_deviations_vanish() {
    let j = json(&riccflat(&["xcheck", "--scenario", "euclidean_parallel", "--samples", "10", "--json"]));
    for k in ["spray", "h_tensor", "fd_metric", "fd_form"] {
        assert!(j[k].as_f64().unwrap() < 1e-12, "{k}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"verify\"\nscenario = \"sphere3_hopf\"\nphi = \"randers\"\nsamples = 10\n").unwrap();
    let path = cfg.to_str().unwrap();
    assert_eq!(riccflat(&["verify", "--config", path]).status.code(), Some(5));
    assert_eq!(riccflat(&["verify", "--config", path, "--scenario", "euclidean_parallel"]).status.code(), Some(0));
    assert_eq!(riccflat(&["compute", "--config", path]).status.code(), Some(2));
}

#[test]
fn config_file_unknown_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"scenario": "sphere3_hopf", "sampels": 3}"#).unwrap();
    assert_eq!(riccflat(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = riccflat(&["verify", "--scenario", "sphere3_hopf", "--eps", "0.5", "--seed", "4", "--print-config"]);
    let first = stdout(&o);
    let cfg = dir.path().join("echo.toml");
    std::fs::write(&cfg, &first).unwrap();
    let again = riccflat(&["verify", "--config", cfg.to_str().unwrap(), "--print-config"]);
    assert_eq!(stdout(&again), first);
}
