// SPDX-License-Identifier: Apache-2.0

// First-order Bogoliubov coefficients of a wall driven at the main resonance
// of modes 1 and 2, from the time integrals and from the closed form.
//
// ```bash
// cargo run --example dyson_oscillating_wall
// ```

use dce_core::perturbative::{
    dyson_transform, oscillating_beta_closed_form, resonant_particle_number, ResonanceBranch, ResonanceSpec,
};
use dce_core::quadrature::AdaptiveQuadrature;
use dce_core::{CavityConfig, FrequencyMatrix, OscillatingScenario, SchwarzschildSpacetime};

pub fn run_example() -> dce_core::Result<f64> {
    let flat = SchwarzschildSpacetime::flat();
    let template = OscillatingScenario::new(0.0, 1.0, 1e-3, 1.0, 100)?;
    let spec = ResonanceSpec::new(1, 2, ResonanceBranch::Main)?;
    let scenario = spec.scenario(&template, &flat)?;
    println!("nu = {:.6}, T = {:.4}, epsilon = {}", scenario.nu, scenario.duration(), scenario.epsilon());

    let cavity = CavityConfig::new(0.0, 1.0, 8)?;
    let dyson = dyson_transform(
        &scenario.radial_trajectory()?,
        &cavity,
        &FrequencyMatrix::from_config(&cavity),
        &AdaptiveQuadrature::default(),
    )?;
    let closed = oscillating_beta_closed_form(&scenario, &flat, 1, 2, true)?;
    let numeric = dyson.transform.beta_at(1, 2);
    println!("beta_12 quadrature  = {numeric:.9e}");
    println!("beta_12 closed form = {:.9e} ({})", closed.value, closed.branch.as_str());
    println!("|difference| = {:.3e}, quadrature error bound {:.3e}", (numeric - closed.value).norm(), dyson.quadrature_error);

    let n12 = resonant_particle_number(&scenario, &flat, &spec, 1, 2)?;
    println!("|beta_12|^2 = {:.6e}, resonant estimate {:.6e}", numeric.norm_sqr(), n12);
    Ok((numeric - closed.value).norm())
}

#[allow(dead_code)]
fn main() -> dce_core::Result<()> {
    run_example().map(|_| ())
}
