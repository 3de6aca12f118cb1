mod common;

use std::sync::OnceLock;

use pulselab::experiments::{
    assemble_dichotomy, criterion_agrees, pulse_outcome, run_dichotomy, run_full_suite,
    run_threshold, PulseOutcome, ThresholdConfig, ThresholdOutcome, Verdict,
};
use pulselab::pulses::{PulseConfig, PulseResult};
use pulselab::waves::{SpeedSign, SpeedSignReport, WaveConfig, WaveResult};
use pulselab::Error;

use common::{fixture, setup};

fn tau0_pulse() -> &'static PulseResult {
    static PULSE: OnceLock<PulseResult> = OnceLock::new();
    PULSE.get_or_init(|| {
        let s = setup("bistable_positive");
        let (outcome, pulse, path) = pulse_outcome(&s.p, &s.hom, &s.eq, &PulseConfig::default());
        assert!(outcome.is_found(), "{outcome:?}");
        assert_eq!(path.last().unwrap().tau, 0.0);
        pulse.unwrap()
    })
}

fn coarse_wave() -> WaveConfig {
    WaveConfig {
        cells: 800,
        t_end: 60.0,
        ..WaveConfig::default()
    }
}

fn fake_wave(c: f64, stderr: f64) -> WaveResult {
    WaveResult {
        c,
        stderr,
        n_points: 10,
        window: [0.0, 1.0],
        times: Vec::new(),
        front_positions: Vec::new(),
        final_profile: None,
    }
}

#[test]
fn zero_multiple_of_the_pulse_dies_out_immediately() {
    let s = setup("bistable_positive");
    let cfg = ThresholdConfig {
        lambdas: vec![0.0],
        t_end: 10.0,
        ..ThresholdConfig::default()
    };
    let report = run_threshold(&s.p, &s.eq, tau0_pulse(), &cfg).unwrap();
    match report.runs[0].outcome {
        ThresholdOutcome::Extinction { t } => assert!(t <= cfg.sample_every),
        ref other => panic!("{other:?}"),
    }
}

#[test]
fn small_and_large_multiples_split() {
    let s = setup("bistable_positive");
    let cfg = ThresholdConfig {
        lambdas: vec![0.5, 1.5],
        ..ThresholdConfig::default()
    };
    let report = run_threshold(&s.p, &s.eq, tau0_pulse(), &cfg).unwrap();
    assert!(report.monotone_in_lambda);
    assert!(matches!(
        report.runs[0].outcome,
        ThresholdOutcome::Extinction { .. }
    ));
    match report.runs[1].outcome {
        ThresholdOutcome::Propagation { speed, .. } => assert!(speed > 0.0),
        ref other => panic!("{other:?}"),
    }
}

#[test]
fn negative_fixture_is_consistent() {
    let s = setup("bistable_negative");
    let report = run_dichotomy(
        "neg",
        &s.p,
        &s.hom,
        &s.eq,
        &coarse_wave(),
        &PulseConfig::default(),
    )
    .unwrap();
    assert!(report.c < 0.0);
    assert!(
        matches!(report.pulse, PulseOutcome::Failed { tau: Some(_), .. }),
        "{:?}",
        report.pulse
    );
    assert_eq!(report.verdict, Verdict::Consistent);
    assert!(criterion_agrees(&report));
}

#[test]
fn tiny_speed_is_inconclusive() {
    let criterion = SpeedSignReport {
        integral: 1e-3,
        sign: SpeedSign::Positive,
    };
    let outcome = PulseOutcome::Failed {
        reason: "none".into(),
        tau: None,
    };
    let err = assemble_dichotomy(
        "x",
        &fake_wave(0.001, 1e-4),
        criterion,
        outcome.clone(),
        None,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Inconclusive { .. }));
    // a clear speed with a noisy fit is also inconclusive
    let err = assemble_dichotomy(
        "x",
        &fake_wave(0.05, 0.02),
        criterion,
        outcome.clone(),
        None,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Inconclusive { .. }));
    let report = assemble_dichotomy("x", &fake_wave(0.05, 1e-3), criterion, outcome, None).unwrap();
    assert_eq!(report.verdict, Verdict::Inconsistent);
}

#[test]
fn suite_stops_at_equilibria_for_unit_params() {
    let cfg = fixture("unit_params");
    let err = run_full_suite(&cfg.params, &cfg.suite_settings()).unwrap_err();
    match err {
        Error::Stage { stage, .. } => assert_eq!(stage, "equilibria"),
        other => panic!("{other}"),
    }
}
