// SPDX-License-Identifier: Apache-2.0

// Tortoise coordinate of a Schwarzschild exterior and its numerical inverse.
//
// ```bash
// cargo run --example tortoise_roundtrip
// ```

use dce_core::SchwarzschildSpacetime;

pub fn run_example() -> dce_core::Result<f64> {
    let st = SchwarzschildSpacetime::new(1.0)?;
    let mut worst = 0.0_f64;
    let samples = 1000;
    for k in 0..samples {
        // distance to the horizon log-spaced over (1e-6, 1e6) Schwarzschild radii
        let u = (k as f64 + 0.5) / samples as f64;
        let r = 1.0 + (1e-6_f64.ln() * (1.0 - u) + 1e6_f64.ln() * u).exp();
        let x = st.tortoise(r)?;
        let back = st.inverse_tortoise(x)?;
        worst = worst.max((back - r).abs() / r);
    }
    println!("max relative roundtrip error over {samples} radii: {worst:.3e}");

    for r in [1.001, 1.5, 3.0, 10.0] {
        println!(
            "r = {r:>6}: x = {:>10.6}, lapse = {:.6}, proper time of t = 1: {:.6}",
            st.tortoise(r)?,
            st.lapse(r)?,
            st.proper_time(r, 1.0)?
        );
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> dce_core::Result<()> {
    run_example().map(|_| ())
}
