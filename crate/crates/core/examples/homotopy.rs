//! The bump `g`, the vector `q` and the upper solution for one fixture.

use pulselab::config::parse_config;
use pulselab::equilibria::find_equilibria;
use pulselab::homotopy::{build_g, construct_q, find_upper_solution};
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
    let tau1 = cfg.homotopy.tau1;
    let (g, gf) = build_g(p, &eq, tau1)?;
    println!("g: m = {:.5}, r = {:.5}, A = {:.5e}", g.m, g.r, g.amplitude);
    println!(
        "G zeros T1 = {:.6}, T2 = {:.6}, int_0^T2 G = {:.4e}",
        gf.t1, gf.t2, gf.i2
    );

    let hom = HomotopySetup { tau1, g };
    for tau in [0.0, tau1, 1.0] {
        let q = construct_q(p, &hom, tau)?;
        println!("tau = {tau}: q = {:.3?}", q);
    }
    let psi = find_upper_solution(p, &hom, &eq, 0.1, &cfg.tau_grid)?;
    println!(
        "upper solution: epsilon = {}, kappa = {:.3?}",
        psi.epsilon, psi.kappa
    );
    Ok(())
}
