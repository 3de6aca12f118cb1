//! Front speeds: the cubic against its exact value, then the full system.

use pulselab::config::parse_config;
use pulselab::equilibria::find_equilibria;
use pulselab::experiments::resolve_g;
use pulselab::waves::{wave_speed_scalar, wave_speed_system, WaveConfig};
use pulselab::HomotopySetup;

fn main() -> pulselab::Result<()> {
    let cfg = WaveConfig::default();
    for a in [0.1, 0.25, 0.4, 0.6] {
        let w = wave_speed_scalar(move |u| u * (u - a) * (1.0 - u), 1.0, 1.0, &cfg)?;
        let exact = (1.0 - 2.0 * a) / 2f64.sqrt();
        println!("cubic a = {a}: c = {:+.5} (exact {exact:+.5})", w.c);
    }

    for name in ["bistable_positive", "bistable_negative"] {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        let run = parse_config(path.as_ref())?;
        let p = &run.params;
        let eq = find_equilibria(p)?;
        let (g, _) = resolve_g(p, &eq, run.homotopy.tau1, run.homotopy.g)?;
        let hom = HomotopySetup {
            tau1: run.homotopy.tau1,
            g,
        };
        let w = wave_speed_system(p, &hom, 0.0, &eq, &cfg)?;
        println!("{name}: c0 = {:+.5} +- {:.1e}", w.c, w.stderr);
    }
    Ok(())
}
