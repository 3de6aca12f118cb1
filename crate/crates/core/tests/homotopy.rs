mod common;

use nalgebra::SVector;
use pulselab::homotopy::{
    build_upper_solution, check_upper_solution, construct_q, find_upper_solution,
    verify_speed_preservation, DEFAULT_LAMBDAS,
};
use pulselab::kinetics::{eval_f_tau, jacobian};
use pulselab::waves::WaveConfig;

use common::setup;

fn dense_taus() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

#[test]
fn g_sign_pattern_and_integral() {
    let s = setup("bistable_positive");
    let gf = &s.gf;
    assert!(0.0 < gf.t1 && gf.t1 < gf.t2 && gf.t2 < s.eq.t_minus);
    let (lo, hi) = gf.g.support();
    assert!(s.eq.t_bar < lo && hi < s.eq.t_minus);
    assert!(gf.eval(0.5 * gf.t1) < 0.0);
    assert!(gf.eval(0.5 * (gf.t1 + gf.t2)) > 0.0);
    assert!(gf.eval(0.5 * (gf.t2 + s.eq.t_minus)) < 0.0);
    // independent quadrature of G on [0, T2]
    let n = 200_000;
    let h = gf.t2 / n as f64;
    let simpson: f64 = (0..n)
        .map(|k| {
            let a = k as f64 * h;
            h / 6.0 * (gf.eval(a) + 4.0 * gf.eval(a + 0.5 * h) + gf.eval(a + h))
        })
        .sum();
    assert!(
        (simpson - gf.i2).abs() <= 1e-6 * gf.i2.abs(),
        "{simpson} vs {}",
        gf.i2
    );
    assert!(gf.i2 > 0.0);
}

#[test]
fn q_is_positive_and_pushes_inward() {
    for name in ["bistable_positive", "bistable_negative"] {
        let s = setup(name);
        for tau in dense_taus() {
            let q = construct_q(&s.p, &s.hom, tau).unwrap();
            assert!(q.iter().all(|&x| x > 0.0));
            let jq = jacobian(&s.p, &s.hom, tau, &[0.0; 8]) * SVector::<f64, 8>::from(q);
            assert!(jq.iter().all(|&x| x < 0.0), "{name} tau {tau}: {jq:?}");
        }
    }
}

#[test]
fn upper_solution_on_a_dense_grid() {
    let s = setup("bistable_positive");
    let psi = find_upper_solution(&s.p, &s.hom, &s.eq, 0.1, &s.cfg.tau_grid).unwrap();
    assert!(psi.ordering_holds());
    check_upper_solution(&s.p, &s.hom, &psi, &dense_taus()).unwrap();
    // spot check directly: every component of F strictly negative
    for k in 1..=50 {
        let v = psi.eval(&s.p, psi.s_max * k as f64 / 50.0);
        let f = eval_f_tau(&s.p, &s.hom, 0.37, &v);
        assert!(f.iter().all(|&x| x < 0.0));
    }
    let at_zero = psi.eval(&s.p, 0.0);
    for i in 0..8 {
        assert!((at_zero[i] - s.eq.w_minus[i]).abs() <= 1e-12 * (1.0 + s.eq.w_minus[i]));
    }
}

#[test]
fn misordered_lambdas_are_rejected() {
    let s = setup("bistable_positive");
    let mut lambdas = DEFAULT_LAMBDAS;
    lambdas.swap(0, 7);
    assert!(build_upper_solution(&s.p, &s.eq, 0.01, &lambdas).is_err());
}

#[test]
fn speed_stays_positive_along_the_homotopy() {
    let s = setup("bistable_positive");
    let coarse = WaveConfig {
        cells: 800,
        t_end: 60.0,
        ..WaveConfig::default()
    };
    let report =
        verify_speed_preservation(&s.p, &s.hom, &s.eq, &s.gf, &[0.0, s.hom.tau1, 1.0], &coarse)
            .unwrap();
    assert!(report.c0 > 0.0 && report.c1.c > 0.0);
    assert!(
        report.all_bounds_hold(),
        "{:?}",
        report.entries.iter().map(|e| e.wave.c).collect::<Vec<_>>()
    );
}
