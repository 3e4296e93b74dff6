// SPDX-License-Identifier: Apache-2.0

// Closed-form boundary couplings of the cavity modes, checked against
// brute-force quadrature of the Klein-Gordon products.
//
// ```bash
// cargo run --example coupling_matrices
// ```

use dce_core::modes::{coupling_matrices, g_overlap, verify_coupling_against_quadrature};
use dce_core::CavityConfig;

pub fn run_example() -> dce_core::Result<f64> {
    let cavity = CavityConfig::new(0.0, 1.0, 6)?;
    let c = coupling_matrices(&cavity);
    println!("w = {:?}", cavity.frequencies());
    println!("A2 (outer wall, mode mixing):\n{:.4}", c.a2);
    println!("B2 (outer wall, pair creation):\n{:.4}", c.b2);
    println!("g_12 = {:.6}, g_13 = {}", g_overlap(1, 2), g_overlap(1, 3));

    let report = verify_coupling_against_quadrature(&cavity, 1e-7)?;
    println!("largest residual against quadrature: {:.3e} ({} flagged)", report.max_residual(), report.flagged.len());
    Ok(report.max_residual())
}

#[allow(dead_code)]
fn main() -> dce_core::Result<()> {
    run_example().map(|_| ())
}
