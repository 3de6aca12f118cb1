//! Scaled pulses as initial data: small multiples die out, large ones
//! start a front.
//!
//! `cargo run --example threshold -- 0.9 1.1`

use pulselab::config::parse_config;
use pulselab::equilibria::find_equilibria;
use pulselab::experiments::{pulse_outcome, resolve_g, run_threshold, ThresholdConfig};
use pulselab::HomotopySetup;

fn main() -> pulselab::Result<()> {
    let cfg = parse_config(
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/bistable_positive.json"
        )
        .as_ref(),
    )?;
    let p = &cfg.params;
    let eq = find_equilibria(p)?;
    let (g, _) = resolve_g(p, &eq, cfg.homotopy.tau1, cfg.homotopy.g)?;
    let hom = HomotopySetup {
        tau1: cfg.homotopy.tau1,
        g,
    };

    let (outcome, pulse, _) = pulse_outcome(p, &hom, &eq, &cfg.pulse);
    let Some(pulse) = pulse else {
        eprintln!("no pulse: {outcome:?}");
        std::process::exit(2);
    };
    let mut lambdas: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if lambdas.is_empty() {
        lambdas = vec![0.6, 0.8, 0.95, 1.05, 1.2, 1.5];
    }
    let report = run_threshold(
        p,
        &eq,
        &pulse,
        &ThresholdConfig {
            lambdas,
            ..cfg.threshold.clone()
        },
    )?;
    for run in &report.runs {
        println!("lambda = {:5.2}: {:?}", run.lambda, run.outcome);
    }
    println!("monotone in lambda: {}", report.monotone_in_lambda);
    Ok(())
}
