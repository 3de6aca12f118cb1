//! Uniform equilibria of a parameter set and the sign of `P'` at each.
//!
//! `cargo run --example equilibria -- [config.json]`

use pulselab::config::parse_config;
use pulselab::equilibria::{build_p, closed_form_d, find_equilibria};
use pulselab::kinetics::eval_f;

fn main() -> pulselab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/bistable_positive.json"
        )
        .into()
    });
    let cfg = parse_config(path.as_ref())?;
    let p = &cfg.params;

    let eq = find_equilibria(p)?;
    for (name, w, dp) in [
        ("w+", eq.w_plus, eq.dp[0]),
        ("w-bar", eq.w_bar, eq.dp[1]),
        ("w-", eq.w_minus, eq.dp[2]),
    ] {
        let res = eval_f(p, &w).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        println!(
            "{name:>5}: T = {:.8}  P'(T) = {dp:+.4e}  |F| = {res:.1e}",
            w[7]
        );
    }

    let rational = build_p(p)?;
    println!(
        "R(T) = {:.4e} T^4 + {:.4e} T^3 + {:.4e} T^2 + {:.4e} T",
        rational.a, rational.b, rational.c, rational.d
    );
    println!("closed-form d = {:.6e}", closed_form_d(p));
    Ok(())
}
