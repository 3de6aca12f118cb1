//! Sign of the wave speed against pulse existence on both fixtures.

use pulselab::config::parse_config;
use pulselab::equilibria::find_equilibria;
use pulselab::experiments::{resolve_g, run_dichotomy};
use pulselab::HomotopySetup;

fn main() -> pulselab::Result<()> {
    for name in ["bistable_positive", "bistable_negative"] {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let cfg = parse_config(path.as_ref())?;
        let p = &cfg.params;
        let eq = find_equilibria(p)?;
        let (g, _) = resolve_g(p, &eq, cfg.homotopy.tau1, cfg.homotopy.g)?;
        let hom = HomotopySetup {
            tau1: cfg.homotopy.tau1,
            g,
        };
        let r = run_dichotomy(name, p, &hom, &eq, &cfg.wave, &cfg.pulse)?;
        println!(
            "{name}: c0 = {:+.4}, pulse {:?}, verdict {:?}",
            r.c, r.pulse, r.verdict
        );
    }
    Ok(())
}
