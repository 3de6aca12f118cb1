mod common;

use proptest::prelude::*;
use pulselab::kinetics::{check_monotone, eval_f_tau, jacobian};
use pulselab::params::in_region_c;
use pulselab::State;

use common::setup;

fn state_in_c() -> impl Strategy<Value = [f64; 8]> {
    // unit fractions of a scale; capacities are all 1 on the fixtures
    prop::array::uniform8(0.0..1.0f64)
}

fn fd_jacobian(f: impl Fn(&State) -> State, v: &State) -> [[f64; 8]; 8] {
    let mut out = [[0.0; 8]; 8];
    for j in 0..8 {
        let h = 1e-6 * (1.0 + v[j].abs());
        let mut plus = *v;
        let mut minus = *v;
        plus[j] += h;
        minus[j] -= h;
        let (fp, fm) = (f(&plus), f(&minus));
        for i in 0..8 {
            out[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jacobian_matches_central_differences(v in state_in_c(), tau in 0.0..=1.0f64) {
        let s = setup("bistable_positive");
        let exact = jacobian(&s.p, &s.hom, tau, &v);
        let fd = fd_jacobian(|w| eval_f_tau(&s.p, &s.hom, tau, w), &v);
        for i in 0..8 {
            for j in 0..8 {
                let tol = 1e-6 * (1.0 + exact[(i, j)].abs()) + 1e-4 * s.hom.g.amplitude * (j == 7) as u8 as f64;
                prop_assert!((exact[(i, j)] - fd[i][j]).abs() <= tol, "({i},{j}): {} vs {}", exact[(i, j)], fd[i][j]);
            }
        }
    }

    #[test]
    fn off_diagonal_entries_nonnegative_in_c(v in state_in_c(), tau in 0.0..=1.0f64) {
        let s = setup("bistable_positive");
        prop_assume!(in_region_c(&s.p, &v));
        let report = check_monotone(&s.p, &s.hom, tau, &[v]).unwrap();
        prop_assert!(report.is_monotone(), "{:?}", report.violations);
    }

    #[test]
    fn thrombin_row_decouples_at_tau_one(v in state_in_c(), u in state_in_c()) {
        let s = setup("bistable_positive");
        let mut w = u;
        w[7] = v[7];
        let a = eval_f_tau(&s.p, &s.hom, 1.0, &v)[7];
        let b = eval_f_tau(&s.p, &s.hom, 1.0, &w)[7];
        prop_assert_eq!(a, b);
    }

    #[test]
    fn equilibria_are_zeros_for_every_tau(tau in 0.0..=1.0f64) {
        let s = setup("bistable_positive");
        for w in s.eq.states() {
            let f = eval_f_tau(&s.p, &s.hom, tau, &w);
            prop_assert!(common::sup_norm(&f) <= 1e-12, "tau {tau}: {f:?}");
        }
    }

    #[test]
    fn homotopy_is_continuous_at_tau1(v in state_in_c()) {
        let s = setup("bistable_positive");
        let t1 = s.hom.tau1;
        let below = eval_f_tau(&s.p, &s.hom, t1 - 1e-12, &v);
        let at = eval_f_tau(&s.p, &s.hom, t1, &v);
        for i in 0..8 {
            prop_assert!((below[i] - at[i]).abs() <= 1e-9);
        }
    }
}

#[test]
fn bump_only_touches_the_thrombin_row() {
    let s = setup("bistable_positive");
    let (lo, hi) = s.hom.g.support();
    let mut v = s.eq.w_bar;
    v[7] = 0.5 * (lo + hi);
    let a = eval_f_tau(&s.p, &s.hom, 0.3, &v);
    let b = eval_f_tau(
        &s.p,
        &pulselab::HomotopySetup::without_bump(s.hom.tau1),
        0.3,
        &v,
    );
    assert_eq!(a[..7], b[..7]);
    assert!(a[7] > b[7]);
}
