//! Pulse of `w'' + w (w - a)(1 - w) = 0` from the first integral.

use pulselab::pulses::{scalar_pulse, PulseDomain};

fn main() -> pulselab::Result<()> {
    let a = 0.25;
    let f = move |w: f64| w * (w - a) * (1.0 - w);
    let pulse = scalar_pulse(
        &f,
        1.0,
        1.0,
        &PulseDomain {
            length: 40.0,
            dx: 0.01,
        },
    )?;
    println!(
        "w0 = {:.10}, first-integral defect {:.1e}",
        pulse.w0,
        pulse.first_integral_defect(&f)
    );
    for x in [0.0, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let i = (x / pulse.grid.dx).round() as usize;
        println!("w({x:4.1}) = {:.6e}", pulse.values[i]);
    }
    Ok(())
}
