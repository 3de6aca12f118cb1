use proptest::prelude::*;
use pulselab::waves::{
    cfl_limit, simulate, speed_sign_scalar_criterion, wave_speed_scalar, Boundary, Grid,
    Integrator, Profile, ScalarReaction, SpeedSign, StepConfig, Stepper, WaveConfig,
};

fn cubic(a: f64) -> impl Fn(f64) -> f64 + Sync + Copy {
    move |u| u * (u - a) * (1.0 - u)
}

fn exact_speed(a: f64) -> f64 {
    (1.0 - 2.0 * a) / 2f64.sqrt()
}

#[test]
fn cubic_front_speeds() {
    let cfg = WaveConfig {
        cells: 2000,
        t_end: 80.0,
        ..WaveConfig::default()
    };
    for a in [0.25, 0.75] {
        let w = wave_speed_scalar(cubic(a), 1.0, 1.0, &cfg).unwrap();
        assert!(
            (w.c - exact_speed(a)).abs() < 2e-2,
            "a = {a}: {} vs {}",
            w.c,
            exact_speed(a)
        );
    }
}

#[test]
fn imex_front_speed_is_close_to_explicit() {
    let base = WaveConfig {
        cells: 1000,
        t_end: 60.0,
        ..WaveConfig::default()
    };
    let explicit = wave_speed_scalar(cubic(0.3), 1.0, 1.0, &base).unwrap();
    let imex = WaveConfig {
        stepper: Stepper::Imex,
        ..base
    };
    let imex = wave_speed_scalar(cubic(0.3), 1.0, 1.0, &imex).unwrap();
    assert!(
        (explicit.c - imex.c).abs() < 5e-3,
        "{} vs {}",
        explicit.c,
        imex.c
    );
}

#[test]
fn heat_kernel_matches_closed_form() {
    // u(x, t) = exp(-x^2 / (1 + 4t)) / sqrt(1 + 4t)
    let r = ScalarReaction::new(|_| 0.0, 1.0);
    let grid = Grid::full_line(20.0, 800);
    let init = Profile::from_fn(grid, 1, |x, _| (-x * x).exp());
    let cfg = StepConfig {
        dt: None,
        t_end: 1.0,
        stride: 0.25,
        stepper: Stepper::Explicit,
    };
    let traj = simulate(&r, init, [Boundary::Neumann, Boundary::Neumann], &cfg).unwrap();
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        let s = 1.0 + 4.0 * t;
        let err = (0..grid.nodes())
            .map(|i| (snap.get(i, 0) - (-grid.x(i).powi(2) / s).exp() / s.sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-4, "t = {t}: {err}");
    }
}

#[test]
fn neumann_conserves_mass() {
    let r = ScalarReaction::new(|_| 0.0, 2.0);
    let grid = Grid::half_line(10.0, 200);
    let init = Profile::from_fn(grid, 1, |x, _| if x < 2.0 { 1.0 } else { 0.0 });
    let mass = |p: &Profile| {
        let v = p.component(0);
        grid.dx * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
    };
    let m0 = mass(&init);
    for stepper in [Stepper::Explicit, Stepper::Imex] {
        let mut integ = Integrator::new(
            &r,
            init.clone(),
            [Boundary::Neumann, Boundary::Neumann],
            5e-4,
            stepper,
        )
        .unwrap();
        integ.advance_to(3.0).unwrap();
        assert!(
            (mass(integ.profile()) - m0).abs() < 1e-10 * m0,
            "{stepper:?}"
        );
    }
}

#[test]
fn criterion_sign_matches_integral() {
    assert_eq!(
        speed_sign_scalar_criterion(cubic(0.2), 1.0).unwrap().sign,
        SpeedSign::Positive
    );
    assert_eq!(
        speed_sign_scalar_criterion(cubic(0.8), 1.0).unwrap().sign,
        SpeedSign::Negative
    );
}

#[test]
fn explicit_step_above_cfl_is_refused() {
    let r = ScalarReaction::new(cubic(0.25), 1.0);
    let grid = Grid::full_line(10.0, 200);
    let dt = 1.2 * cfl_limit(grid.dx, 1.0) / 0.9;
    assert!(Integrator::new(
        &r,
        Profile::constant(grid, &[0.0]),
        [Boundary::Neumann, Boundary::Neumann],
        dt,
        Stepper::Explicit
    )
    .is_err());
    assert!(Integrator::new(
        &r,
        Profile::constant(grid, &[0.0]),
        [Boundary::Neumann, Boundary::Neumann],
        dt,
        Stepper::Imex
    )
    .is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ordered_data_stay_ordered(
        lo in prop::collection::vec(0.0..0.5f64, 101),
        bump in prop::collection::vec(0.0..0.5f64, 101),
        a in 0.1..0.45f64,
    ) {
        let r = ScalarReaction::new(cubic(a), 1.0);
        let grid = Grid::half_line(10.0, 100);
        let u0 = Profile { grid, ncomp: 1, values: lo.clone() };
        let v0 = Profile { grid, ncomp: 1, values: lo.iter().zip(&bump).map(|(x, b)| x + b).collect() };
        let bc = [Boundary::Neumann, Boundary::Neumann];
        let dt = cfl_limit(grid.dx, 1.0);
        let mut u = Integrator::new(&r, u0, bc.clone(), dt, Stepper::Explicit).unwrap();
        let mut v = Integrator::new(&r, v0, bc, dt, Stepper::Explicit).unwrap();
        u.advance_to(5.0).unwrap();
        v.advance_to(5.0).unwrap();
        for (x, y) in u.profile().values.iter().zip(&v.profile().values) {
            prop_assert!(*x <= *y + 1e-10);
        }
    }
}
