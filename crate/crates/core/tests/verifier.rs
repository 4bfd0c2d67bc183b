use proptest::prelude::*;

use riccflat::phi::BuiltinPhi;
use riccflat::verify::{find_scenario, scenario_catalog, sphere3_hopf, verify_ricci_flat, xcheck, PhiSpec, Role, Scenario, VerifyOptions};

fn small(samples: usize, seed: u64) -> VerifyOptions {
    VerifyOptions { samples: Some(samples), seed: Some(seed), delta_s: None }
}

#[test]
fn report_json_is_deterministic() {
    let prep = find_scenario("sphere3_hopf", None).unwrap().prepare().unwrap();
    let a = verify_ricci_flat(&prep, &small(24, 7)).unwrap().without_timing();
    let b = verify_ricci_flat(&prep, &small(24, 7)).unwrap().without_timing();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = verify_ricci_flat(&prep, &small(24, 8)).unwrap();
    assert_ne!(a.audits.s_range, c.audits.s_range);
}

#[test]
fn positive_scenarios_pass_and_controls_fail() {
    for sc in scenario_catalog() {
        let rep = verify_ricci_flat(&sc.prepare().unwrap(), &small(40, 1)).unwrap();
        assert!(rep.implication_holds, "{}", sc.name);
        match sc.role {
            Role::Positive => assert!(rep.passed, "{}: {:?}", sc.name, rep.diagnostics),
            Role::NegativeControl => assert!(!rep.passed, "{}", sc.name),
        }
    }
}

#[test]
fn flagship_cross_checks_pass() {
    let prep = find_scenario("sphere3_hopf", Some(0.5)).unwrap().prepare().unwrap();
    let rep = xcheck(&prep, &small(16, 3)).unwrap();
    assert!(rep.passed, "{rep:?}");
}

#[test]
fn scenario_round_trips_through_json() {
    for sc in scenario_catalog() {
        let text = serde_json::to_string(&sc).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sc);
    }
}

#[test]
fn unknown_scenario_fields_are_rejected() {
    let mut v = serde_json::to_value(find_scenario("sphere3_hopf", None).unwrap()).unwrap();
    v["bogus"] = serde_json::json!(1);
    assert!(serde_json::from_value::<Scenario>(v).is_err());
}

fn non_solution() -> impl Strategy<Value = BuiltinPhi> {
    prop::sample::select(vec![BuiltinPhi::Randers, BuiltinPhi::Quadratic])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // Whenever (a)-(e) hold the conclusion must hold; other profiles break (e).
    #[test]
    fn implication_never_fails(model in non_solution(), eps in 0.1f64..0.6, seed in 0u64..1000) {
        let mut sc = sphere3_hopf(eps);
        sc.phi = PhiSpec::Builtin { model };
        let rep = verify_ricci_flat(&sc.prepare().unwrap(), &small(12, seed)).unwrap();
        prop_assert!(rep.implication_holds);
        prop_assert!(!rep.conditions.e.pass);
        prop_assert!(rep.conditions.b.pass && rep.conditions.c.pass && rep.conditions.d.pass);
    }
}
