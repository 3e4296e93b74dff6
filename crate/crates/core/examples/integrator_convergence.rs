// SPDX-License-Identifier: Apache-2.0

// Fixed-step convergence of the matrix ODE integrator, and its departure
// from first-order perturbation theory as the amplitude grows.
//
// ```bash
// cargo run --release --example integrator_convergence
// ```

use dce_core::integrator::{convergence_study, integrate, IntegrationSettings, Method};
use dce_core::perturbative::dyson_transform;
use dce_core::quadrature::AdaptiveQuadrature;
use dce_core::{CavityConfig, FrequencyMatrix, OscillatingScenario};

pub fn run_example() -> dce_core::Result<Vec<f64>> {
    let cavity = CavityConfig::new(0.0, 1.0, 8)?;
    let scenario = OscillatingScenario::new(0.0, 1.0, 1e-3, 2.2, 2)?;
    let traj = scenario.radial_trajectory()?;
    let study = convergence_study(&traj, &cavity, &[4, 6, 8], &[50, 100, 200, 400], Method::Magnus4, 1e-3)?;
    println!("tracking beta{:?}", study.tracked);
    for e in &study.entries {
        println!("N = {:>2} steps = {:>4}: beta = {:.10e}", e.n_modes, e.steps, e.tracked_beta);
    }
    println!("mode truncation converged at N = {:?}", study.converged_at);

    let mut relative = Vec::new();
    for amplitude in [1e-2, 1e-3, 1e-4] {
        let s = OscillatingScenario::new(0.0, 1.0, amplitude, 2.2, 2)?;
        let traj = s.radial_trajectory()?;
        let exact = integrate(&traj, &cavity, &IntegrationSettings::adaptive(1e-12))?;
        let first = dyson_transform(&traj, &cavity, &FrequencyMatrix::from_config(&cavity), &AdaptiveQuadrature::default())?;
        let ((m, n), b) = first.transform.dominant_beta(cavity.n_modes());
        let rel = (exact.transform.beta_at(m, n) - b).norm() / b.norm();
        println!("epsilon = {amplitude:e}: dominant beta({m},{n}) relative difference {rel:.3e}");
        relative.push(rel);
    }
    Ok(relative)
}

#[allow(dead_code)]
fn main() -> dce_core::Result<()> {
    run_example().map(|_| ())
}
