mod common;

use nalgebra::{SMatrix, SVector};
use proptest::prelude::*;
use pulselab::equilibria::{
    build_p, classify_stability, closed_form_d, find_equilibria, metzler_principal_eigenvalue,
    p_value, search_bistable_params, sorted_real_spectrum, SearchBox,
};
use pulselab::error::BistableViolation;
use pulselab::kinetics::{eval_f, jacobian, Jacobian};
use pulselab::{Error, HomotopySetup, KineticParams, State};

use common::{fixture, setup, sup_norm};

/// Newton on the full 8-dimensional system, started off the equilibrium.
fn newton_8d(p: &KineticParams, start: State) -> State {
    let hom = HomotopySetup::without_bump(0.5);
    let mut v = SVector::<f64, 8>::from(start);
    for _ in 0..50 {
        let f = SVector::<f64, 8>::from(eval_f(p, &v.into()));
        if f.amax() < 1e-15 {
            break;
        }
        let j: SMatrix<f64, 8, 8> = jacobian(p, &hom, 0.0, &v.into());
        v -= j.lu().solve(&f).expect("regular Jacobian");
    }
    v.into()
}

#[test]
fn equilibria_satisfy_the_full_system() {
    let s = setup("bistable_positive");
    for w in s.eq.states() {
        assert!(sup_norm(&eval_f(&s.p, &w)) <= 1e-12);
    }
    assert_eq!(s.eq.t_plus, 0.0);
    assert!(s.eq.t_bar > 0.0 && s.eq.t_bar < s.eq.t_minus && s.eq.t_minus < s.p.t0());
    assert!(s.eq.dp[0] < 0.0 && s.eq.dp[1] > 0.0 && s.eq.dp[2] < 0.0);
}

#[test]
fn newton_in_full_space_lands_on_the_same_points() {
    let s = setup("bistable_positive");
    for w in [s.eq.w_bar, s.eq.w_minus] {
        let guess = w.map(|x| 1.02 * x);
        let v = newton_8d(&s.p, guess);
        for i in 0..8 {
            assert!(
                (v[i] - w[i]).abs() <= 1e-10 * (1.0 + w[i]),
                "{v:?} vs {w:?}"
            );
        }
    }
}

#[test]
fn kinetics_relax_to_the_upper_state() {
    // the upper equilibrium is stable: integrate v' = F(v) from a nearby point
    let s = setup("bistable_positive");
    let mut v = s.eq.w_minus.map(|x| 1.05 * x);
    let dt = 1e-2;
    for _ in 0..200_000 {
        let k1 = eval_f(&s.p, &v);
        let mid: State = std::array::from_fn(|i| v[i] + 0.5 * dt * k1[i]);
        let k2 = eval_f(&s.p, &mid);
        v = std::array::from_fn(|i| v[i] + dt * k2[i]);
    }
    for i in 0..8 {
        assert!((v[i] - s.eq.w_minus[i]).abs() < 1e-9, "{v:?}");
    }
}

#[test]
fn q_roots_from_the_companion_matrix() {
    let s = setup("bistable_positive");
    let rational = build_p(&s.p).unwrap();
    let roots = rational.q().real_roots(1e-9).expect("QR converges");
    let positive: Vec<f64> = roots.into_iter().filter(|&r| r > 1e-12).collect();
    assert_eq!(positive.len(), 2, "{positive:?}");
    assert!((positive[0] - s.eq.t_bar).abs() < 1e-9);
    assert!((positive[1] - s.eq.t_minus).abs() < 1e-9);
}

#[test]
fn rational_form_matches_direct_evaluation() {
    let s = setup("bistable_negative");
    let rational = build_p(&s.p).unwrap();
    for k in 0..=50 {
        let t = s.p.t0() * k as f64 / 50.0;
        let direct = p_value(&s.p, t);
        assert!(
            (rational.eval(t) - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
            "T = {t}"
        );
    }
    let d = closed_form_d(&s.p);
    assert!((rational.d - d).abs() <= 1e-10 * d.abs());
}

#[test]
fn unit_params_violate_condition_p_through_d() {
    let p = fixture("unit_params").params;
    assert!(closed_form_d(&p) >= 0.0);
    let err = find_equilibria(&p).unwrap_err();
    assert!(matches!(
        err,
        Error::ConditionPViolated(BistableViolation::DNonNegative)
    ));
}

#[test]
fn stability_pattern_on_both_fixtures() {
    for name in ["bistable_positive", "bistable_negative"] {
        let s = setup(name);
        let report = classify_stability(&s.p, &s.hom, &s.eq, &s.cfg.tau_grid).unwrap();
        for e in &report.entries {
            assert_eq!(e.signs, [-1, 1, -1], "{name} tau {}", e.tau);
        }
        for (formula, eig) in report.tau1_formula.iter().zip(&report.tau1_eigenvalues) {
            for (a, b) in formula.iter().zip(eig) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn search_is_reproducible_and_bistable() {
    let bx = SearchBox {
        budget: 4000,
        ..SearchBox::default()
    };
    let a = search_bistable_params(&bx, 7).unwrap();
    let b = search_bistable_params(&bx, 7).unwrap();
    assert_eq!(a, b);
    let eq = find_equilibria(&a).unwrap();
    assert!(eq.t_bar < eq.t_minus);
}

fn metzler() -> impl Strategy<Value = Jacobian> {
    (
        prop::array::uniform32(0.0..2.0f64),
        prop::array::uniform32(0.0..2.0f64),
        prop::array::uniform8(-3.0..1.0f64),
    )
        .prop_map(|(a, b, d)| {
            let mut j = Jacobian::zeros();
            let mut k = 0;
            for r in 0..8 {
                for c in 0..8 {
                    if r != c {
                        // about half the couplings are exactly zero
                        let v = if k < 32 { a[k] } else { b[k - 32] };
                        j[(r, c)] = if v < 1.0 { 0.0 } else { v - 1.0 };
                        k += 1;
                    }
                }
                j[(r, r)] = d[r];
            }
            j
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn perron_root_matches_schur(j in metzler()) {
        if let Some(spec) = sorted_real_spectrum(&j) {
            let top = metzler_principal_eigenvalue(&j);
            prop_assert!((top - spec[7]).abs() <= 1e-7 * (1.0 + j.amax()), "{top} vs {}", spec[7]);
        }
    }
}
