//! Random search for a bistable parameter set.

use pulselab::equilibria::{find_equilibria, search_bistable_params, SearchBox};

fn main() -> pulselab::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let p = search_bistable_params(&SearchBox::default(), seed)?;
    let eq = find_equilibria(&p)?;
    println!(
        "seed {seed}: T-bar = {:.6}, T- = {:.6}",
        eq.t_bar, eq.t_minus
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&p.to_json_value()).expect("plain data")
    );
    Ok(())
}
