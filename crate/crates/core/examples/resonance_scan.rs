// SPDX-License-Identifier: Apache-2.0

// Closed-form scan over the driving frequency near a massive body. The
// curvature term opens a resonance at half the main resonant frequency,
// absent in flat space. It rises above the flat-space background once
// `(A r_s / R^2) p` is of order one, so this example sits close to the mass.
//
// ```bash
// cargo run --example resonance_scan
// ```

use dce_core::perturbative::{linear_grid, resonance_scan, subharmonic_beta, ScanOptions};
use dce_core::{OscillatingScenario, SchwarzschildSpacetime};

pub fn run_example() -> dce_core::Result<f64> {
    let curved = SchwarzschildSpacetime::new(0.1)?;
    let template = OscillatingScenario::new(1.0, 1.0, 0.05, 1.0, 20000)?;
    let half = 0.5 * (template.base_frequency(&curved, 1)? + template.base_frequency(&curved, 2)?);
    let grid = linear_grid(half - 2e-3, half + 2e-3, 801)?;
    let options = ScanOptions::default();

    let mut peak = 0.0;
    for (label, st) in [("flat", SchwarzschildSpacetime::flat()), ("r_s = 0.1", curved)] {
        let scan = resonance_scan(&template, &st, &grid, &[(1, 2)], &options)?;
        let top = scan.rows.iter().map(|r| r.beta.norm()).fold(0.0, f64::max);
        println!("{label}: largest |beta_12| within 2e-3 of nu = {half:.9} is {top:.4e}");
        for p in scan.peaks_for(1, 2) {
            let kind = p.resonance.map_or("unclassified", |r| r.as_str());
            println!("  peak at nu = {:.9} |beta| = {:.4e} ({kind})", p.nu, p.abs_beta);
        }
        peak = top;
    }
    let at_half = subharmonic_beta(&template.with_nu(half)?, &curved, 1, 2)?;
    println!("subharmonic formula: |beta_12| = {:.4e}", at_half.norm());
    Ok(peak / at_half.norm())
}

#[allow(dead_code)]
fn main() -> dce_core::Result<()> {
    run_example().map(|_| ())
}
