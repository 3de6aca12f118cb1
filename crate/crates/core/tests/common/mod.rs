#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

use pulselab::config::{parse_config, RunConfig};
use pulselab::equilibria::{find_equilibria, EquilibriumSet};
use pulselab::experiments::resolve_g;
use pulselab::homotopy::GFunction;
use pulselab::{HomotopySetup, KineticParams};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> RunConfig {
    parse_config(&fixture_path(name)).expect("fixture parses")
}

pub struct Setup {
    pub cfg: RunConfig,
    pub p: KineticParams,
    pub eq: EquilibriumSet,
    pub hom: HomotopySetup,
    pub gf: GFunction,
}

/// Cached per fixture name.
pub fn setup(name: &str) -> &'static Setup {
    static CACHE: OnceLock<Mutex<HashMap<String, &'static Setup>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry(name.to_string())
        .or_insert_with(|| Box::leak(Box::new(build_setup(name))))
}

fn build_setup(name: &str) -> Setup {
    let cfg = fixture(name);
    let p = cfg.params;
    let eq = find_equilibria(&p).expect("bistable fixture");
    let (g, gf) = resolve_g(&p, &eq, cfg.homotopy.tau1, cfg.homotopy.g).expect("bump");
    let hom = HomotopySetup {
        tau1: cfg.homotopy.tau1,
        g,
    };
    Setup {
        cfg,
        p,
        eq,
        hom,
        gf,
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
