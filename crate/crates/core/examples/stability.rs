//! Principal eigenvalues along the homotopy and a sampled check that the
//! kinetics stay cooperative.

use pulselab::config::parse_config;
use pulselab::equilibria::{classify_stability, find_equilibria};
use pulselab::experiments::resolve_g;
use pulselab::kinetics::{check_monotone, sample_region_c};
use pulselab::HomotopySetup;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

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

    let taus: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let report = classify_stability(p, &hom, &eq, &taus)?;
    println!("  tau   lambda(w+)   lambda(w-bar)  lambda(w-)");
    for e in &report.entries {
        println!(
            "{:5.2}  {:+.5e}  {:+.5e}  {:+.5e}",
            e.tau, e.principal[0], e.principal[1], e.principal[2]
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples = sample_region_c(p, &eq.w_minus, 2000, &mut rng);
    for tau in [0.0, 0.5, 1.0] {
        let m = check_monotone(p, &hom, tau, &samples)?;
        println!(
            "tau = {tau}: {} negative off-diagonal entries in {} samples",
            m.violations.len(),
            samples.len()
        );
    }
    Ok(())
}
