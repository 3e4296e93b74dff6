// SPDX-License-Identifier: Apache-2.0

//! Scenario files: TOML with the blocks `spacetime`, `cavity`, `trajectory`,
//! `run`, `scan` and `output`. Unknown keys are rejected.
//!
//! ```toml
//! [spacetime]
//! r_s = 0.01
//!
//! [cavity]
//! r0 = 10.0       # or x1 / x2 in conformal coordinates (flat space only)
//! l0 = 1.0
//! n_modes = 20
//!
//! [trajectory]
//! kind = "oscillating-wall"
//! amplitude = 1e-3
//! p = 40
//! resonance = { q = 1, r = 2, branch = "main" }   # or nu = ...
//!
//! [run]
//! methods = ["dyson", "closed-form"]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{IntegrationSettings, Method, StepControl};
use crate::modes::CavityConfig;
use crate::perturbative::{ResonanceBranch, ResonanceSpec};
use crate::quadrature::AdaptiveQuadrature;
use crate::spacetime::{radial_to_conformal, SchwarzschildSpacetime};
use crate::trajectories::{OscillatingScenario, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub spacetime: SpacetimeBlock,
    pub cavity: CavityBlock,
    #[serde(default)]
    pub trajectory: TrajectoryBlock,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeBlock {
    #[serde(default)]
    pub r_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
    pub n_modes: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKindName {
    #[default]
    Static,
    OscillatingWall,
    RigidTranslation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchName {
    Main,
    Subharmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceBlock {
    pub q: usize,
    pub r: usize,
    pub branch: BranchName,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryBlock {
    #[serde(default)]
    pub kind: TrajectoryKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<ResonanceBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wobble: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Dyson,
    Integrate,
    Scattering,
    ClosedForm,
}

impl MethodName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodName::Dyson => "dyson",
            MethodName::Integrate => "integrate",
            MethodName::Scattering => "scattering",
            MethodName::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorName {
    #[default]
    Magnus4,
    Rk4,
}

fn default_methods() -> Vec<MethodName> {
    vec![MethodName::Dyson, MethodName::Integrate]
}

fn default_tolerance() -> f64 {
    1e-12
}

fn default_integrator_tolerance() -> f64 {
    1e-10
}

fn default_true() -> bool {
    true
}

fn default_max_steps() -> usize {
    1 << 20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodName>,
    /// Relative and absolute tolerance of the oscillatory quadratures.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_integrator_tolerance")]
    pub integrator_tolerance: f64,
    #[serde(default)]
    pub integrator: IntegratorName,
    #[serde(default = "default_true")]
    pub recompute_couplings: bool,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            methods: default_methods(),
            tolerance: default_tolerance(),
            integrator_tolerance: default_integrator_tolerance(),
            integrator: IntegratorName::default(),
            recompute_couplings: true,
            max_steps: default_max_steps(),
        }
    }
}

fn default_peak_fraction() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub nu_min: f64,
    pub nu_max: f64,
    pub points: usize,
    pub pairs: Vec<[usize; 2]>,
    #[serde(default = "default_peak_fraction")]
    pub peak_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// A validated scenario with every derived object built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub spacetime: SchwarzschildSpacetime,
    /// Cavity at `t = 0` in conformal coordinates.
    pub cavity: CavityConfig,
    /// Wall trajectories in the coordinates the config was written in.
    pub radial: Trajectory,
    /// Wall trajectories in conformal coordinates.
    pub trajectory: Trajectory,
    /// Present for the oscillating wall.
    pub oscillating: Option<OscillatingScenario>,
}

impl Scenario {
    pub fn quadrature(&self) -> AdaptiveQuadrature {
        AdaptiveQuadrature::with_tolerance(self.config.run.tolerance)
    }

    pub fn integration_settings(&self) -> IntegrationSettings {
        let run = &self.config.run;
        IntegrationSettings {
            step_control: StepControl::Adaptive { tolerance: run.integrator_tolerance, max_steps: run.max_steps },
            method: match run.integrator {
                IntegratorName::Magnus4 => Method::Magnus4,
                IntegratorName::Rk4 => Method::Rk4,
            },
            recompute_couplings: run.recompute_couplings,
        }
    }
}

/// Parses TOML text; syntax errors and unknown keys become [`Error::Parse`].
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config = parse_scenario(&text).map_err(|e| e.context(&path.display().to_string()))?;
    build_scenario(config)
}

fn need<T: Copy>(value: Option<T>, name: &str, kind: &str, errors: &mut Vec<String>) -> Option<T> {
    if value.is_none() {
        errors.push(format!("trajectory.{name} is required for kind \"{kind}\""));
    }
    value
}

fn forbid<T>(value: &Option<T>, name: &str, kind: &str, errors: &mut Vec<String>) {
    if value.is_some() {
        errors.push(format!("trajectory.{name} does not apply to kind \"{kind}\""));
    }
}

/// Checks every invariant of the config and builds the derived objects.
/// All violations are reported together in one [`Error::Validation`].
pub fn build_scenario(config: ScenarioConfig) -> Result<Scenario> {
    let mut errors: Vec<String> = Vec::new();
    let r_s = config.spacetime.r_s;
    if !(r_s.is_finite() && r_s >= 0.0) {
        errors.push(format!("spacetime.r_s must be finite and >= 0, got {r_s}"));
    }
    let curved = r_s > 0.0;

    // cavity placement in the coordinates of the config
    let cav = &config.cavity;
    let mut placement: Option<(f64, f64)> = None;
    match (cav.r0, cav.l0, cav.x1, cav.x2) {
        (Some(r0), Some(l0), None, None) => {
            if !(l0.is_finite() && l0 > 0.0) {
                errors.push(format!("cavity.l0 must be positive, got {l0}"));
            } else if !r0.is_finite() {
                errors.push(format!("cavity.r0 must be finite, got {r0}"));
            } else {
                if curved && r0 <= r_s {
                    errors.push(format!("cavity.r0 = {r0} must exceed the Schwarzschild radius r_s = {r_s}"));
                }
                placement = Some((r0, l0));
            }
        }
        (None, None, Some(x1), Some(x2)) => {
            if curved {
                errors.push("cavity.x1/x2 are conformal coordinates; with r_s > 0 give cavity.r0 and cavity.l0".into());
            } else if !(x1.is_finite() && x2.is_finite() && x2 > x1) {
                errors.push(format!("cavity needs x2 > x1, got x1 = {x1}, x2 = {x2}"));
            } else {
                placement = Some((x1, x2 - x1));
            }
        }
        _ => errors.push("cavity needs exactly one of the pairs (r0, l0) or (x1, x2)".into()),
    }
    if cav.n_modes == 0 {
        errors.push("cavity.n_modes must be at least 1".into());
    }

    // trajectory block
    let tb = &config.trajectory;
    let kind_name = match tb.kind {
        TrajectoryKindName::Static => "static",
        TrajectoryKindName::OscillatingWall => "oscillating-wall",
        TrajectoryKindName::RigidTranslation => "rigid-translation",
    };
    let mut radial: Option<Trajectory> = None;
    let mut oscillating: Option<OscillatingScenario> = None;
    match tb.kind {
        TrajectoryKindName::Static => {
            for (v, name) in [(&tb.amplitude, "amplitude"), (&tb.nu, "nu"), (&tb.shift, "shift"), (&tb.wobble, "wobble"), (&tb.frequency, "frequency")] {
                forbid(v, name, kind_name, &mut errors);
            }
            forbid(&tb.p, "p", kind_name, &mut errors);
            forbid(&tb.resonance, "resonance", kind_name, &mut errors);
            let duration = tb.duration.unwrap_or(1.0);
            if let Some((a, l)) = placement {
                match Trajectory::stationary(a, a + l, duration) {
                    Ok(t) => radial = Some(t),
                    Err(e) => errors.push(format!("trajectory: {e}")),
                }
            }
        }
        TrajectoryKindName::OscillatingWall => {
            for (v, name) in [(&tb.duration, "duration"), (&tb.shift, "shift"), (&tb.wobble, "wobble"), (&tb.frequency, "frequency")] {
                forbid(v, name, kind_name, &mut errors);
            }
            let amplitude = need(tb.amplitude, "amplitude", kind_name, &mut errors);
            let p = need(tb.p, "p", kind_name, &mut errors);
            if tb.nu.is_some() == tb.resonance.is_some() {
                errors.push("trajectory needs exactly one of nu or resonance for kind \"oscillating-wall\"".into());
            }
            if let (Some((r0, l0)), Some(amplitude), Some(p)) = (placement, amplitude, p) {
                let st = SchwarzschildSpacetime::new(r_s.max(0.0)).unwrap_or_else(|_| SchwarzschildSpacetime::flat());
                let nu = match (tb.nu, tb.resonance) {
                    (Some(nu), None) => Some(nu),
                    (None, Some(res)) => {
                        let branch = match res.branch {
                            BranchName::Main => ResonanceBranch::Main,
                            BranchName::Subharmonic => ResonanceBranch::Subharmonic,
                        };
                        let spec = ResonanceSpec::new(res.q, res.r, branch);
                        // the template's nu is replaced; any positive value works
                        let template = OscillatingScenario::new(r0, l0, amplitude, 1.0, p.max(1));
                        match (spec, template) {
                            (Ok(spec), Ok(template)) if !curved || r0 > r_s => match spec.driving_frequency(&template, &st) {
                                Ok(nu) => Some(nu),
                                Err(e) => {
                                    errors.push(format!("trajectory.resonance: {e}"));
                                    None
                                }
                            },
                            (Err(e), _) => {
                                errors.push(format!("trajectory.resonance: {e}"));
                                None
                            }
                            _ => None,
                        }
                    }
                    _ => None,
                };
                if let Some(nu) = nu {
                    if amplitude.abs() * nu >= 1.0 {
                        errors.push(format!("wall speed A nu = {} must stay below 1", amplitude.abs() * nu));
                    }
                    if curved && r0 + l0 - amplitude.abs() <= r_s {
                        errors.push(format!("outer wall reaches r = {} at or inside r_s = {r_s}", r0 + l0 - amplitude.abs()));
                    }
                    match OscillatingScenario::new(r0, l0, amplitude, nu, p) {
                        Ok(s) => {
                            oscillating = Some(s);
                            match s.radial_trajectory() {
                                Ok(t) => radial = Some(t),
                                Err(e) => errors.push(format!("trajectory: {e}")),
                            }
                        }
                        Err(e) => errors.push(format!("trajectory: {e}")),
                    }
                }
            }
        }
        TrajectoryKindName::RigidTranslation => {
            for (v, name) in [(&tb.amplitude, "amplitude"), (&tb.nu, "nu")] {
                forbid(v, name, kind_name, &mut errors);
            }
            forbid(&tb.p, "p", kind_name, &mut errors);
            forbid(&tb.resonance, "resonance", kind_name, &mut errors);
            let duration = need(tb.duration, "duration", kind_name, &mut errors);
            let shift = tb.shift.unwrap_or(0.0);
            let wobble = tb.wobble.unwrap_or(0.0);
            let frequency = tb.frequency.unwrap_or(0.0);
            if let (Some((a, l)), Some(duration)) = (placement, duration) {
                match Trajectory::rigid_translation(a, l, shift, wobble, frequency, duration) {
                    Ok(t) => {
                        let report = t.validate();
                        errors.extend(report.violations.iter().map(|v| format!("trajectory: {v}")));
                        if curved && t.min_position(crate::trajectories::Boundary::Inner) <= r_s {
                            errors.push(format!("inner wall reaches r_s = {r_s}"));
                        }
                        radial = Some(t);
                    }
                    Err(e) => errors.push(format!("trajectory: {e}")),
                }
            }
        }
    }
    if let Some(t) = &radial {
        for v in t.validate().violations {
            let line = format!("trajectory: {v}");
            if !errors.contains(&line) {
                errors.push(line);
            }
        }
    }

    // methods
    let run = &config.run;
    if run.methods.is_empty() {
        errors.push("run.methods must list at least one method".into());
    }
    let mut seen = run.methods.clone();
    seen.sort();
    seen.dedup();
    if seen.len() != run.methods.len() {
        errors.push("run.methods lists a method twice".into());
    }
    for m in &run.methods {
        match m {
            MethodName::Scattering => {
                if tb.kind == TrajectoryKindName::OscillatingWall {
                    errors.push(
                        "method \"scattering\" requires a rigid-translation (or static) trajectory: \
                         the instantaneous-mode method needs x2(t) - x1(t) constant"
                            .into(),
                    );
                } else if curved && tb.kind == TrajectoryKindName::RigidTranslation {
                    errors.push(
                        "method \"scattering\" requires a rigid translation in conformal coordinates; \
                         a radial translation with r_s > 0 changes the conformal length"
                            .into(),
                    );
                }
            }
            MethodName::ClosedForm if tb.kind != TrajectoryKindName::OscillatingWall => {
                errors.push("method \"closed-form\" requires an oscillating-wall trajectory".into());
            }
            _ => {}
        }
    }
    if !(run.tolerance.is_finite() && run.tolerance > 0.0) {
        errors.push(format!("run.tolerance must be positive, got {}", run.tolerance));
    }
    if !(run.integrator_tolerance.is_finite() && run.integrator_tolerance > 0.0) {
        errors.push(format!("run.integrator_tolerance must be positive, got {}", run.integrator_tolerance));
    }
    if run.max_steps == 0 {
        errors.push("run.max_steps must be positive".into());
    }

    if let Some(scan) = &config.scan {
        if tb.kind != TrajectoryKindName::OscillatingWall {
            errors.push("scan requires an oscillating-wall trajectory".into());
        }
        if !(scan.nu_min.is_finite() && scan.nu_max.is_finite() && scan.nu_min > 0.0 && scan.nu_max > scan.nu_min) {
            errors.push(format!("scan needs 0 < nu_min < nu_max, got [{}, {}]", scan.nu_min, scan.nu_max));
        }
        if scan.points < 2 {
            errors.push("scan.points must be at least 2".into());
        }
        if scan.pairs.is_empty() {
            errors.push("scan.pairs must list at least one mode pair".into());
        }
        if scan.pairs.iter().any(|p| p[0] == 0 || p[1] == 0) {
            errors.push("scan.pairs use mode labels starting at 1".into());
        }
        if !(scan.peak_fraction.is_finite() && (0.0..=1.0).contains(&scan.peak_fraction)) {
            errors.push(format!("scan.peak_fraction must lie in [0, 1], got {}", scan.peak_fraction));
        }
        if let Some(a) = tb.amplitude {
            if a.abs() * scan.nu_max >= 1.0 {
                errors.push(format!("scan reaches wall speed A nu_max = {} >= 1", a.abs() * scan.nu_max));
            }
        }
    }

    if !errors.is_empty() {
        return Err(Error::Validation(errors));
    }
    let radial = radial.expect("validated trajectory");
    let spacetime = SchwarzschildSpacetime::new(r_s)?;
    let trajectory = radial_to_conformal(&spacetime, &radial).map_err(|e| Error::Validation(vec![e.to_string()]))?;
    let (a, l) = placement.expect("validated placement");
    let x1 = spacetime.tortoise(a).map_err(|e| Error::Validation(vec![e.to_string()]))?;
    let x2 = spacetime.tortoise(a + l).map_err(|e| Error::Validation(vec![e.to_string()]))?;
    let cavity = CavityConfig::new(x1, x2, config.cavity.n_modes)?;
    Ok(Scenario { config, spacetime, cavity, radial, trajectory, oscillating })
}
