// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line and fails when the criterion does.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use dce_core::integrator::{integrate, IntegrationSettings};
use dce_core::linalg::{cis, max_abs, CMatrix};
use dce_core::perturbative::{
    dyson_transform, linear_grid, oscillating_beta_closed_form, resonance_scan, subharmonic_beta, EvaluationBranch,
    ResonanceBranch, ResonanceSpec, ScanOptions,
};
use dce_core::quadrature::AdaptiveQuadrature;
use dce_core::scattering::{evolve, extract_coefficients};
use dce_core::symplectic::identity_residuals;
use dce_core::{BogoliubovTransform, CavityConfig, FrequencyMatrix, OscillatingScenario, SchwarzschildSpacetime, Trajectory};

fn report(criterion: usize, name: &str, pass: bool, detail: String) {
    println!("criterion {criterion}: {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

fn dyson(traj: &Trajectory, cavity: &CavityConfig) -> dce_core::perturbative::PerturbativeResult {
    dyson_transform(traj, cavity, &FrequencyMatrix::from_config(cavity), &AdaptiveQuadrature::default()).unwrap()
}

#[test]
fn criterion_1_bogoliubov_identities() {
    // epsilon = 1e-3, A nu = 3 pi 1e-3 < 0.01, driven at the (1, 2) resonance
    let scenario = OscillatingScenario::new(0.0, 1.0, 1e-3, 3.0 * PI, 10).unwrap();
    assert!(scenario.amplitude * scenario.nu <= 0.01);
    let cavity = CavityConfig::new(0.0, 1.0, 20).unwrap();
    let out = integrate(&scenario.radial_trajectory().unwrap(), &cavity, &IntegrationSettings::default()).unwrap();
    let (r1, r2) = identity_residuals(&out.transform, 10).unwrap();
    let beta = out.transform.beta_at(1, 2).norm();
    report(
        1,
        "Bogoliubov identities on the interior block",
        r1 < 1e-8 && r2 < 1e-8 && beta > 1e-3,
        format!("N = 20, interior 10: {r1:.2e}, {r2:.2e} (|beta_12| = {beta:.3e}, {} steps)", out.steps),
    );
}

#[test]
fn criterion_2_scattering_matches_dyson() {
    let cavity = CavityConfig::new(0.0, 1.0, 10).unwrap();
    let quad = AdaptiveQuadrature::default();
    let cases = [(1e-3, 0.0, 0.0, 4.0), (0.0, 2e-4, 9.0, 5.0), (5e-4, 1e-4, 4.0, 3.0), (-2e-3, 5e-4, 13.0, 7.5)];
    let mut worst = 0.0_f64;
    let mut smallest_signal = f64::INFINITY;
    for (shift, wobble, frequency, duration) in cases {
        let traj = Trajectory::rigid_translation(0.0, 1.0, shift, wobble, frequency, duration).unwrap();
        let state = evolve(&traj, &cavity, &quad).unwrap();
        let scattering = extract_coefficients(&state, &cavity).unwrap().transform;
        let first = dyson(&traj, &cavity).transform;
        worst = worst.max(max_abs(&(&scattering.beta - &first.beta)));
        smallest_signal = smallest_signal.min(first.dominant_beta(10).1.norm());
    }
    report(
        2,
        "scattering and Dyson beta coincide",
        worst < 1e-8 && smallest_signal > 1e-8,
        format!("{} rigid trajectories, max |d beta| = {worst:.2e} (smallest dominant |beta| {smallest_signal:.2e})", cases.len()),
    );
}

#[test]
fn criterion_3_first_order_validity() {
    let cavity = CavityConfig::new(0.0, 1.0, 8).unwrap();
    let epsilons = [1e-2, 1e-3, 1e-4];
    let mut rel = Vec::new();
    for eps in epsilons {
        let traj = OscillatingScenario::new(0.0, 1.0, eps, 2.2, 2).unwrap().radial_trajectory().unwrap();
        let exact = integrate(&traj, &cavity, &IntegrationSettings::adaptive(1e-12)).unwrap();
        let first = dyson(&traj, &cavity);
        let ((m, n), b) = first.transform.dominant_beta(8);
        rel.push((exact.transform.beta_at(m, n) - b).norm() / b.norm());
    }
    // least-squares slope of log(rel) against log(eps)
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = rel.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    report(
        3,
        "integrator/Dyson difference is first order",
        (slope - 1.0).abs() <= 0.2,
        format!("relative differences {:.3e} {:.3e} {:.3e}, slope {slope:.4}", rel[0], rel[1], rel[2]),
    );
}

#[test]
fn criterion_4_flat_resonance() {
    let flat = SchwarzschildSpacetime::flat();
    let template = OscillatingScenario::new(0.0, 1.0, 1e-3, 1.0, 200).unwrap();
    let spec = ResonanceSpec::new(1, 2, ResonanceBranch::Main).unwrap();
    let scenario = spec.scenario(&template, &flat).unwrap();
    let t_end = scenario.duration();
    assert!(scenario.nu * t_end >= 200.0 * PI * (1.0 - 1e-12));

    let closed = oscillating_beta_closed_form(&scenario, &flat, 1, 2, true).unwrap();
    let w1 = PI;
    let expected = 0.25 * 2.0 * (scenario.epsilon() * w1 * t_end).powi(2);
    let rel = (closed.value.norm_sqr() - expected).abs() / expected;

    let cavity = CavityConfig::new(0.0, 1.0, 6).unwrap();
    let first = dyson(&scenario.radial_trajectory().unwrap(), &cavity);
    let diff = (first.transform.beta_at(1, 2) - closed.value).norm();
    let budget = first.quadrature_error + 1e-12 * closed.value.norm();
    report(
        4,
        "flat-space main resonance",
        closed.branch == EvaluationBranch::MainLimit && rel < 0.01 && diff <= budget,
        format!(
            "|beta_12|^2 = {:.6e} vs {expected:.6e} (rel {rel:.1e}); |dyson - closed| = {diff:.2e} <= {budget:.2e}",
            closed.value.norm_sqr()
        ),
    );
}

#[test]
fn criterion_5_curvature_reduction() {
    let (r0, l0, r_s) = (100.0, 1.0, 0.1);
    let template = OscillatingScenario::new(r0, l0, 1e-3, 1.0, 100).unwrap();
    let spec = ResonanceSpec::new(1, 2, ResonanceBranch::Main).unwrap();
    let number = |st: &SchwarzschildSpacetime| {
        let s = spec.scenario(&template, st).unwrap();
        let v = oscillating_beta_closed_form(&s, st, 1, 2, true).unwrap();
        assert_eq!(v.branch, EvaluationBranch::MainLimit);
        v.value.norm_sqr()
    };
    let ratio = number(&SchwarzschildSpacetime::new(r_s).unwrap()) / number(&SchwarzschildSpacetime::flat());
    let expected = 1.0 - 2.0 * l0 * r_s / (r0 * r0);
    report(
        5,
        "curvature-induced reduction at the main resonance",
        (ratio - expected).abs() < 1e-6,
        format!("ratio {ratio:.10} vs {expected:.10} (|d| = {:.2e})", (ratio - expected).abs()),
    );
}

#[test]
fn criterion_6_subharmonic_resonance() {
    // The curvature term stands out of the flat background once (A r_s / R^2) p is O(1).
    let curved = SchwarzschildSpacetime::new(0.1).unwrap();
    let template = OscillatingScenario::new(1.0, 1.0, 0.05, 1.0, 20000).unwrap();
    let half = 0.5 * (template.base_frequency(&curved, 1).unwrap() + template.base_frequency(&curved, 2).unwrap());
    let grid = linear_grid(half - 2e-3, half + 2e-3, 801).unwrap();
    let options = ScanOptions::default();
    let curved_scan = resonance_scan(&template, &curved, &grid, &[(1, 2)], &options).unwrap();
    let flat_scan = resonance_scan(&template, &SchwarzschildSpacetime::flat(), &grid, &[(1, 2)], &options).unwrap();

    let top = curved_scan.peaks_for(1, 2).max_by(|a, b| a.abs_beta.total_cmp(&b.abs_beta)).copied().unwrap();
    let flat_top = flat_scan.rows.iter().map(|r| r.beta.norm()).fold(0.0, f64::max);
    let flat_has_sub = flat_scan.peaks.iter().any(|p| p.resonance == Some(ResonanceBranch::Subharmonic));
    let formula = subharmonic_beta(&template.with_nu(half).unwrap(), &curved, 1, 2).unwrap().norm();
    let rel = (top.abs_beta - formula).abs() / formula;
    report(
        6,
        "subharmonic resonance appears only with curvature",
        top.resonance == Some(ResonanceBranch::Subharmonic)
            && (top.nu - half).abs() <= 1e-5
            && !flat_has_sub
            && flat_top < 0.2 * top.abs_beta
            && rel < 0.05,
        format!(
            "peak |beta_12| = {:.4e} at nu = {:.9} (half sum {half:.9}); subharmonic formula {formula:.4e} (rel {rel:.1e}); flat maximum {flat_top:.3e}",
            top.abs_beta, top.nu
        ),
    );
}

#[test]
fn criterion_7_tortoise_roundtrip() {
    let st = SchwarzschildSpacetime::new(1.0).unwrap();
    let samples = 1000;
    let (lo, hi) = ((1.0 + 1e-6_f64).ln(), 1e6_f64.ln());
    let mut worst = 0.0_f64;
    let mut worst_at = 0.0;
    for k in 0..samples {
        // log-spaced radii, plus log-spaced distances to the horizon
        let r_a = (lo + (hi - lo) * (k as f64 + 0.5) / samples as f64).exp();
        let r_b = 1.0 + (1e-6_f64.ln() + (1e6_f64.ln() - 1e-6_f64.ln()) * (k as f64 + 0.5) / samples as f64).exp();
        for r in [r_a, r_b] {
            let back = st.inverse_tortoise(st.tortoise(r).unwrap()).unwrap();
            let rel = (back - r).abs() / r;
            if rel > worst {
                worst = rel;
                worst_at = r;
            }
        }
    }
    report(
        7,
        "inverse tortoise roundtrip",
        worst < 1e-12,
        format!("{} radii, max relative error {worst:.2e} at r/r_s = {worst_at:.6e}", 2 * samples),
    );
}

fn zero_motion_deviation(s: &BogoliubovTransform, cavity: &CavityConfig, t_end: f64) -> (f64, f64) {
    let n = cavity.n_modes();
    let w = cavity.frequencies();
    let phases = CMatrix::from_fn(n, n, |i, j| if i == j { cis(w[i] * t_end) } else { cis(0.0) * 0.0 });
    (max_abs(&s.beta), max_abs(&(&s.alpha - &phases)))
}

#[test]
fn criterion_8_zero_motion() {
    let quad = AdaptiveQuadrature::default();
    let mut worst = (0.0_f64, 0.0_f64);
    let mut lines = Vec::new();
    let cases = [
        ("flat", SchwarzschildSpacetime::flat(), 0.0, 1.0),
        ("curved", SchwarzschildSpacetime::new(0.5).unwrap(), 2.0, 1.5),
    ];
    for (label, st, r0, l0) in cases {
        let radial = Trajectory::stationary(r0, r0 + l0, 3.7).unwrap();
        let traj = dce_core::spacetime::radial_to_conformal(&st, &radial).unwrap();
        let cavity = CavityConfig::new(st.tortoise(r0).unwrap(), st.tortoise(r0 + l0).unwrap(), 12).unwrap();
        let results = [
            ("dyson", dyson(&traj, &cavity).transform),
            ("integrate", integrate(&traj, &cavity, &IntegrationSettings::default()).unwrap().transform),
            ("scattering", extract_coefficients(&evolve(&traj, &cavity, &quad).unwrap(), &cavity).unwrap().transform),
        ];
        for (name, s) in results {
            let (b, a) = zero_motion_deviation(&s, &cavity, 3.7);
            lines.push(format!("{label}/{name} {b:.1e}/{a:.1e}"));
            worst = (worst.0.max(b), worst.1.max(a));
        }
    }
    report(
        8,
        "static walls give beta = 0 and pure phases",
        worst.0 == 0.0 && worst.1 <= 4.0 * f64::EPSILON,
        format!("max |beta| / max |alpha - diag e^(i w T)|: {}", lines.join(", ")),
    );
}

fn run_cli(config: &Path, out: &Path, workers: &str) {
    let status = Command::new(env!("CARGO_BIN_EXE_dce"))
        .args(["run", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--workers", workers])
        .output()
        .unwrap();
    assert!(status.status.success(), "dce run failed: {}", String::from_utf8_lossy(&status.stderr));
}

#[test]
fn criterion_9_determinism() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let tmp = tempfile::tempdir().unwrap();
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for name in ["rigid_translation", "curved_oscillating", "subharmonic_scan"] {
        let config = configs.join(format!("{name}.toml"));
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        run_cli(&config, &a, "1");
        run_cli(&config, &b, "3");
        let mut files: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        for f in files {
            compared += 1;
            if std::fs::read(a.join(&f)).unwrap() != std::fs::read(b.join(&f)).unwrap() {
                mismatched.push(format!("{name}/{}", f.to_string_lossy()));
            }
        }
    }
    report(
        9,
        "repeated runs are byte-identical",
        mismatched.is_empty() && compared >= 12,
        format!("{compared} files compared across worker counts 1 and 3, mismatches: {mismatched:?}"),
    );
}
