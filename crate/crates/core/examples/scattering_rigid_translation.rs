// SPDX-License-Identifier: Apache-2.0

// Instantaneous-mode amplitudes of a rigidly translated cavity and the
// Bogoliubov coefficients read off at the end of the motion.
//
// ```bash
// cargo run --example scattering_rigid_translation
// ```

use dce_core::linalg::max_abs;
use dce_core::perturbative::dyson_transform;
use dce_core::quadrature::AdaptiveQuadrature;
use dce_core::scattering::{evolve, extract_coefficients};
use dce_core::{CavityConfig, FrequencyMatrix, Trajectory};

pub fn run_example() -> dce_core::Result<f64> {
    let cavity = CavityConfig::new(0.0, 1.0, 10)?;
    let quad = AdaptiveQuadrature::default();
    let mut worst = 0.0_f64;
    for (shift, wobble, frequency) in [(1e-3, 0.0, 0.0), (0.0, 2e-4, 9.0), (5e-4, 1e-4, 4.0)] {
        let traj = Trajectory::rigid_translation(0.0, 1.0, shift, wobble, frequency, 5.0)?;
        let state = evolve(&traj, &cavity, &quad)?;
        let scattering = extract_coefficients(&state, &cavity)?.transform;
        let dyson = dyson_transform(&traj, &cavity, &FrequencyMatrix::from_config(&cavity), &quad)?.transform;
        let diff = max_abs(&(&scattering.beta - &dyson.beta));
        let ((m, n), b) = scattering.dominant_beta(10);
        println!("shift {shift:e} wobble {wobble:e}: dominant beta({m},{n}) = {b:.6e}, max |scattering - dyson| = {diff:.2e}");
        worst = worst.max(diff);
    }

    let stretch = dce_core::OscillatingScenario::new(0.0, 1.0, 1e-3, 2.0, 2)?.radial_trajectory()?;
    match evolve(&stretch, &cavity, &quad) {
        Err(e) => println!("oscillating wall rejected: {e}"),
        Ok(_) => println!("unexpected: a stretching cavity was accepted"),
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> dce_core::Result<()> {
    run_example().map(|_| ())
}
