use proptest::prelude::*;

use riccflat::chart::{default_fd_step, eval_metric_jet, fd_oracle, metric_values, ChartPoint};
use riccflat::fields::{HopfForm, PerturbedHopfForm, StereographicSphere, STEREOGRAPHIC_CHART};
use riccflat::finsler::{riemann_curvature, ricci, LocalGeometry, SprayEngine};
use riccflat::ode::{ode_residual, ode_rhs, TheoremParams};
use riccflat::phi::{phi_jet, q_data, BuiltinPhi, PhiJet};
use riccflat::tensor::{raise_lower, spd_inverse, Slot, Tensor};

const FLAGSHIP: TheoremParams = TheoremParams { c1: 1.0, c2: 0.0, n: 3, b2: 0.09, tau: 1.0 };

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.5f64..1.5)
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0).prop_filter("nonzero", |y| y.iter().map(|v| v * v).sum::<f64>() > 0.05)
}

fn model() -> impl Strategy<Value = BuiltinPhi> {
    prop::sample::select(BuiltinPhi::ALL.to_vec())
}

fn hopf_local(x: &[f64; 3]) -> LocalGeometry {
    LocalGeometry::at(&StereographicSphere::unit(3), &HopfForm { eps: 0.3 }, x).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spray_is_two_homogeneous(x in point(), y in direction(), lambda in 0.2f64..4.0, m in model()) {
        let local = hopf_local(&x);
        let eng = SprayEngine::new(3).unwrap();
        let ly: Vec<f64> = y.iter().map(|v| lambda * v).collect();
        let g1 = eng.spray_direct(&local, &y, &m).unwrap();
        let g2 = eng.spray_direct(&local, &ly, &m).unwrap();
        let scale = g1.full.g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..3 {
            prop_assert!((g2.full.g[i] - lambda * lambda * g1.full.g[i]).abs() <= 1e-9 * lambda * lambda * scale.max(1e-12));
        }
        let r1 = riemann_curvature(&g1.full, &y);
        let r2 = riemann_curvature(&g2.full, &ly);
        prop_assert!(r2.max_abs_diff(&r1.map(|v| lambda * lambda * v)) <= 1e-9 * lambda * lambda * r1.max_abs().max(1e-12));
        prop_assert!(rel_close(ricci(&g2.full, &ly), lambda * lambda * ricci(&g1.full, &y), 1e-9));
    }

    #[test]
    fn fundamental_tensor_euler_identity(x in point(), y in direction(), m in model()) {
        let local = hopf_local(&x);
        let ft = SprayEngine::new(3).unwrap().fundamental_tensor(&local, &y, &m).unwrap();
        prop_assert!(rel_close(ft.g.bilinear(&y, &y), ft.f2, 1e-10));
        prop_assert!(ft.det > 0.0);
    }

    #[test]
    fn trace_formula_matches_riemann_trace(x in point(), y in direction(), m in model()) {
        let local = hopf_local(&x);
        let sp = SprayEngine::new(3).unwrap().spray_direct(&local, &y, &m).unwrap();
        let r = riemann_curvature(&sp.full, &y);
        prop_assert!((r.trace() - ricci(&sp.full, &y)).abs() <= 1e-10 * r.max_abs().max(1.0));
    }

    #[test]
    fn raise_lower_round_trip(x in point(), vals in prop::collection::vec(-2.0f64..2.0, 9)) {
        let a = metric_values(&StereographicSphere::unit(3), &x);
        let inv = spd_inverse(&a).unwrap();
        let t = Tensor::from_fn(3, 2, |i| vals[3 * i[0] + i[1]]);
        let up = raise_lower(&t, &a, &inv, &[Slot::Raise(0), Slot::Raise(1)]).unwrap();
        let back = raise_lower(&up, &a, &inv, &[Slot::Lower(1), Slot::Lower(0)]).unwrap();
        prop_assert!(back.max_abs_diff(&t) <= 1e-13 * t.max_abs().max(1.0) * a.max_abs() * inv.max_abs());
    }

    #[test]
    fn metric_jets_match_finite_differences(x in point(), i in 0usize..3, j in 0usize..3, k in 0usize..3, l in 0usize..3) {
        let field = StereographicSphere::unit(3);
        let mj = eval_metric_jet(&field, &ChartPoint::new(STEREOGRAPHIC_CHART, x.to_vec()).unwrap(), 2).unwrap();
        let f = |p: &[f64]| metric_values(&field, p)[[i, j]];
        let mut e = [0usize; 3];
        e[k] += 1;
        let d1 = fd_oracle(&f, &x, &e, default_fd_step(&x, 1)).unwrap();
        prop_assert!((d1 - mj.da[[i, j, k]]).abs() <= 1e-7 * mj.da[[i, j, k]].abs().max(1.0));
        e[l] += 1;
        let d2 = fd_oracle(&f, &x, &e, default_fd_step(&x, 2)).unwrap();
        prop_assert!((d2 - mj.dda[[i, j, k, l]]).abs() <= 1e-5 * mj.dda[[i, j, k, l]].abs().max(1.0));
    }

    #[test]
    fn q_data_matches_its_definition(s in -0.8f64..0.8, b2 in 0.0f64..0.8, m in model()) {
        let jet = phi_jet(&m, s).unwrap();
        let qd = q_data(&jet, b2).unwrap();
        let q_of = |t: f64| { let j = phi_jet(&m, t).unwrap(); j.phi1 / (j.phi0 - t * j.phi1) };
        let h = 1e-5;
        prop_assert!((qd.q - q_of(s)).abs() < 1e-14);
        prop_assert!((qd.dq - (q_of(s + h) - q_of(s - h)) / (2.0 * h)).abs() < 1e-6);
        let dq_of = |t: f64| q_data(&phi_jet(&m, t).unwrap(), b2).unwrap().dq;
        prop_assert!((qd.ddq - (dq_of(s + h) - dq_of(s - h)) / (2.0 * h)).abs() < 1e-5);
        prop_assert!((qd.delta - (1.0 + s * qd.q + (b2 - s * s) * qd.dq)).abs() < 1e-14);
    }

    #[test]
    fn ode_rhs_plug_back(s in -0.285f64..0.285, q in -3.0f64..3.0) {
        prop_assume!((1.0 + s * q).abs() > 0.05);
        let dq = ode_rhs(s, q, &FLAGSHIP).unwrap();
        prop_assert!(ode_residual(s, q, dq, &FLAGSHIP).abs() <= 1e-12, "{}", ode_residual(s, q, dq, &FLAGSHIP));
    }

    #[test]
    fn ode_rhs_mirror(s in -0.28f64..0.28, q in -3.0f64..3.0, c1 in 0.5f64..2.0) {
        prop_assume!((1.0 + s * q).abs() > 0.05);
        let p = TheoremParams { c1, ..FLAGSHIP };
        // (s, Q) -> (-s, -Q) maps solutions to solutions
        let a = ode_rhs(s, q, &p).unwrap();
        let b = ode_rhs(-s, -q, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn perturbation_residual_scales_linearly() {
    let res = |eta: f64| {
        let form = PerturbedHopfForm { eps: 0.3, eta };
        let local = LocalGeometry::at(&StereographicSphere::unit(3), &form, &[0.3, -0.2, 0.5]).unwrap();
        let y = [0.2, 0.1, 0.3];
        let inv = riccflat::alpha::beta_invariants(&local.metric, &local.form, &local.chr, &local.direction(&y).unwrap()).unwrap();
        inv.r.max_abs()
    };
    let (r3, r2) = (res(1e-3), res(1e-2));
    assert!(r3 > 1e-5 && r3 < 1e-2, "{r3}");
    assert!((r2 / r3 - 10.0).abs() < 0.05, "{}", r2 / r3);
}

#[test]
fn riemannian_profile_is_exactly_alpha() {
    let j = phi_jet(&BuiltinPhi::Riemannian, 0.2).unwrap();
    assert_eq!(j, PhiJet { s: 0.2, phi0: 1.0, phi1: 0.0, phi2: 0.0, phi3: 0.0, phi4: 0.0 });
}
