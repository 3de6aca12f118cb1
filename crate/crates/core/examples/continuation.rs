//! Pulse at tau = 1 carried down to tau = 0, printing the path.

use pulselab::config::parse_config;
use pulselab::equilibria::find_equilibria;
use pulselab::experiments::resolve_g;
use pulselab::pulses::{continue_pulse, linearized_spectrum_check, system_pulse_tau1, PulseConfig};
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
    let pcfg = PulseConfig::default();

    let start = system_pulse_tau1(p, &hom, &eq, &pcfg)?;
    let spec = linearized_spectrum_check(p, &hom, &eq, &start, &pcfg)?;
    println!(
        "tau = 1: T(0) = {:.6}, L = {}, min |eig| = {:.3e}, unstable modes {}",
        start.amplitude[7], start.length, spec.min_abs, spec.positive_count
    );

    let cont = continue_pulse(p, &hom, &eq, &start, &pcfg)?;
    for step in &cont.path {
        println!(
            "tau = {:.4}  T(0) = {:.6}  newton {}",
            step.tau, step.amplitude_t, step.newton_iterations
        );
    }
    let c = cont.pulse.certificate;
    println!(
        "tau = 0 residual {:.1e}, strictly monotone {}",
        c.residual_sup, c.strictly_monotone
    );
    Ok(())
}
