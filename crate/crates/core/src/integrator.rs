// SPDX-License-Identifier: Apache-2.0

//! Direct solution of `dS/dt = G(t) S`, `S(0) = I`, beyond first order.
//!
//! In `(alpha, beta)` blocks the generator is
//!
//! ```text
//! G = [[ iW + A,   B     ],
//!      [ B,       -iW + A ]],   A = A1 x1' + A2 x2',  B = B1 x1' + B2 x2'
//! ```
//!
//! with `A` real antisymmetric and `B` real symmetric, so `G` lies in the
//! algebra that preserves `S K S^dagger = K`. The default stepper is the
//! fourth-order Magnus method on two Gauss points, which stays in the group up
//! to rounding; classical RK4 is provided for comparison.

use crate::error::{Error, Result};
use crate::linalg::{c, commutator, expm, max_abs, CMatrix};
use crate::modes::{coupling_matrices, CavityConfig};
use crate::symplectic::{identity_residuals, phase_evolution, BogoliubovTransform, FrequencyMatrix};
use crate::trajectories::{Boundary, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Fourth-order Magnus, one matrix exponential per step.
    Magnus4,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Magnus4 => "magnus4",
            Method::Rk4 => "rk4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Fixed { steps: usize },
    /// Doubles the step count until two successive runs differ by less than
    /// `tolerance` (max-norm of the change in `alpha` and `beta`, scaled by
    /// the fourth-order Richardson factor 1/15).
    Adaptive { tolerance: f64, max_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub step_control: StepControl,
    pub method: Method,
    /// Refresh `W` and the couplings from the instantaneous cavity length at
    /// every evaluation; otherwise they stay at the configured geometry.
    pub recompute_couplings: bool,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            step_control: StepControl::Adaptive { tolerance: 1e-10, max_steps: 1 << 20 },
            method: Method::Magnus4,
            recompute_couplings: true,
        }
    }
}

impl IntegrationSettings {
    pub fn fixed(steps: usize, method: Method) -> Self {
        Self { step_control: StepControl::Fixed { steps }, method, ..Self::default() }
    }

    pub fn adaptive(tolerance: f64) -> Self {
        Self { step_control: StepControl::Adaptive { tolerance, max_steps: 1 << 20 }, ..Self::default() }
    }

    fn check(&self) -> Result<()> {
        match self.step_control {
            StepControl::Fixed { steps: 0 } => Err(Error::invalid("step count must be positive")),
            StepControl::Adaptive { tolerance, max_steps } => {
                if !(tolerance.is_finite() && tolerance > 0.0) {
                    return Err(Error::invalid(format!("tolerance must be positive, got {tolerance}")));
                }
                if max_steps == 0 {
                    return Err(Error::invalid("max_steps must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOutput {
    pub transform: BogoliubovTransform,
    pub steps: usize,
    /// Estimated max-norm error; zero for fixed steps and for motionless walls.
    pub error_estimate: f64,
    /// Leading block size used for `residuals` (`max(1, N / 2)`).
    pub interior: usize,
    pub residuals: (f64, f64),
}

struct Generator<'a> {
    traj: &'a Trajectory,
    config: &'a CavityConfig,
    recompute: bool,
    frozen: Frozen,
}

struct Frozen {
    omegas: Vec<f64>,
    a1: CMatrix,
    a2: CMatrix,
    b1: CMatrix,
    b2: CMatrix,
}

impl Frozen {
    fn new(config: &CavityConfig) -> Self {
        let cm = coupling_matrices(config);
        let lift = |m: &crate::linalg::RMatrix| m.map(|v| c(v, 0.0));
        Self { omegas: config.frequencies(), a1: lift(&cm.a1), a2: lift(&cm.a2), b1: lift(&cm.b1), b2: lift(&cm.b2) }
    }
}

impl Generator<'_> {
    fn at(&self, t: f64) -> Result<CMatrix> {
        let n = self.config.n_modes();
        let (x1, v1, _) = self.traj.state(Boundary::Inner, t);
        let (x2, v2, _) = self.traj.state(Boundary::Outer, t);
        let local;
        let parts = if self.recompute {
            local = Frozen::new(&CavityConfig::new(x1, x2, n)?);
            &local
        } else {
            &self.frozen
        };
        let a = &parts.a1 * c(v1, 0.0) + &parts.a2 * c(v2, 0.0);
        let b = &parts.b1 * c(v1, 0.0) + &parts.b2 * c(v2, 0.0);
        let mut g = CMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&a);
        g.view_mut((n, n), (n, n)).copy_from(&a);
        g.view_mut((0, n), (n, n)).copy_from(&b);
        g.view_mut((n, 0), (n, n)).copy_from(&b);
        for (k, w) in parts.omegas.iter().enumerate() {
            g[(k, k)] += c(0.0, *w);
            g[(n + k, n + k)] -= c(0.0, *w);
        }
        Ok(g)
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6

fn propagate(gen: &Generator<'_>, method: Method, steps: usize) -> Result<CMatrix> {
    let n2 = 2 * gen.config.n_modes();
    let t_end = gen.traj.duration();
    let h = t_end / steps as f64;
    let mut s = CMatrix::identity(n2, n2);
    for k in 0..steps {
        let t = k as f64 * h;
        match method {
            Method::Magnus4 => {
                let g1 = gen.at(t + (0.5 - GAUSS_OFFSET) * h)?;
                let g2 = gen.at(t + (0.5 + GAUSS_OFFSET) * h)?;
                let mut omega = (&g1 + &g2) * c(0.5 * h, 0.0);
                omega += commutator(&g2, &g1) * c(3f64.sqrt() * h * h / 12.0, 0.0);
                s = expm(&omega) * s;
            }
            Method::Rk4 => {
                let g0 = gen.at(t)?;
                let gm = gen.at(t + 0.5 * h)?;
                let g1 = gen.at((t + h).min(t_end))?;
                let hc = c(h, 0.0);
                let k1 = &g0 * &s;
                let k2 = &gm * (&s + &k1 * c(0.5 * h, 0.0));
                let k3 = &gm * (&s + &k2 * c(0.5 * h, 0.0));
                let k4 = &g1 * (&s + &k3 * hc);
                s += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0);
            }
        }
        if !s.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "{} integration diverged at t = {t} with {steps} steps",
                method.as_str()
            )));
        }
    }
    Ok(s)
}

fn blocks(s: &CMatrix, n: usize) -> Result<BogoliubovTransform> {
    BogoliubovTransform::new(s.view((0, 0), (n, n)).into_owned(), s.view((0, n), (n, n)).into_owned())
}

fn block_difference(a: &BogoliubovTransform, b: &BogoliubovTransform) -> f64 {
    max_abs(&(&a.alpha - &b.alpha)).max(max_abs(&(&a.beta - &b.beta)))
}

/// Starting step count: a few steps per period of the fastest mode.
fn initial_steps(traj: &Trajectory, config: &CavityConfig, method: Method) -> usize {
    let fastest = config.frequencies()[config.n_modes() - 1] + traj.characteristic_frequency();
    let per_unit = match method {
        Method::Magnus4 => 0.5,
        Method::Rk4 => 1.0,
    };
    ((traj.duration() * fastest * per_unit).ceil() as usize).max(8)
}

/// `S(T)` for the trajectory, truncated to the configured number of modes.
pub fn integrate(traj: &Trajectory, config: &CavityConfig, settings: &IntegrationSettings) -> Result<IntegrationOutput> {
    settings.check()?;
    let report = traj.validate();
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::invalid(format!("trajectory rejected: {}", list.join("; "))));
    }
    let n = config.n_modes();
    let interior = (n / 2).max(1);
    let finish = |transform: BogoliubovTransform, steps: usize, error_estimate: f64| -> Result<IntegrationOutput> {
        let residuals = identity_residuals(&transform, interior)?;
        Ok(IntegrationOutput { transform, steps, error_estimate, interior, residuals })
    };

    if traj.boundary_is_fixed(Boundary::Inner) && traj.boundary_is_fixed(Boundary::Outer) {
        let length = traj.state(Boundary::Outer, 0.0).0 - traj.state(Boundary::Inner, 0.0).0;
        let omegas = if settings.recompute_couplings {
            FrequencyMatrix::from_config(&config.with_length(length)?)
        } else {
            FrequencyMatrix::from_config(config)
        };
        return finish(phase_evolution(&omegas, traj.duration()), 0, 0.0);
    }

    let gen = Generator { traj, config, recompute: settings.recompute_couplings, frozen: Frozen::new(config) };
    match settings.step_control {
        StepControl::Fixed { steps } => finish(blocks(&propagate(&gen, settings.method, steps)?, n)?, steps, 0.0),
        StepControl::Adaptive { tolerance, max_steps } => {
            let mut steps = initial_steps(traj, config, settings.method).min(max_steps);
            let mut previous = blocks(&propagate(&gen, settings.method, steps)?, n)?;
            loop {
                if 2 * steps > max_steps {
                    return Err(Error::NumericalFailure(format!(
                        "step size underflow: {} steps did not reach tolerance {tolerance:e} within {max_steps} steps",
                        steps
                    )));
                }
                steps *= 2;
                let next = blocks(&propagate(&gen, settings.method, steps)?, n)?;
                let estimate = block_difference(&next, &previous) / 15.0;
                log::debug!("{} with {steps} steps: error estimate {estimate:e}", settings.method.as_str());
                if estimate <= tolerance {
                    return finish(next, steps, estimate);
                }
                previous = next;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEntry {
    pub n_modes: usize,
    pub steps: usize,
    /// `beta` at the tracked index (see [`ConvergenceReport::tracked`]).
    pub tracked_beta: num_complex::Complex64,
    pub residuals: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// 1-based `(m, n)` of the dominant `beta` of the most refined run,
    /// restricted to the smallest truncation.
    pub tracked: (usize, usize),
    /// Row-major over `(N, steps)`.
    pub entries: Vec<ConvergenceEntry>,
    /// Smallest `N` whose tracked `|beta|` (at the finest step count) differs
    /// from the next `N` by less than the tolerance, relative.
    pub converged_at: Option<usize>,
}

impl ConvergenceReport {
    pub fn entry(&self, n_modes: usize, steps: usize) -> Option<&ConvergenceEntry> {
        self.entries.iter().find(|e| e.n_modes == n_modes && e.steps == steps)
    }
}

/// Runs the fixed-step integrator over a grid of truncations and step counts.
pub fn convergence_study(
    traj: &Trajectory,
    config: &CavityConfig,
    n_list: &[usize],
    step_list: &[usize],
    method: Method,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    let increasing = |v: &[usize]| !v.is_empty() && v[0] > 0 && v.windows(2).all(|w| w[1] > w[0]);
    if !increasing(n_list) || !increasing(step_list) {
        return Err(Error::invalid("mode and step lists must be non-empty and strictly increasing"));
    }
    let mut runs = Vec::new();
    for &n in n_list {
        let cfg = config.with_modes(n)?;
        for &steps in step_list {
            let out = integrate(traj, &cfg, &IntegrationSettings::fixed(steps, method))?;
            runs.push((n, steps, out));
        }
    }
    let finest = &runs.last().expect("non-empty grid").2;
    let (tracked, _) = finest.transform.dominant_beta(n_list[0]);
    let entries: Vec<ConvergenceEntry> = runs
        .iter()
        .map(|(n, steps, out)| ConvergenceEntry {
            n_modes: *n,
            steps: *steps,
            tracked_beta: out.transform.beta_at(tracked.0, tracked.1),
            residuals: out.residuals,
        })
        .collect();
    let last_step = *step_list.last().expect("non-empty");
    let at_finest: Vec<&ConvergenceEntry> = entries.iter().filter(|e| e.steps == last_step).collect();
    let converged_at = at_finest.windows(2).find_map(|w| {
        let (a, b) = (w[0].tracked_beta.norm(), w[1].tracked_beta.norm());
        ((a - b).abs() <= tolerance * b.max(f64::MIN_POSITIVE)).then_some(w[0].n_modes)
    });
    Ok(ConvergenceReport { tracked, entries, converged_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cis;
    use crate::modes::CavityConfig;
    use crate::perturbative::dyson_transform;
    use crate::quadrature::AdaptiveQuadrature;
    use std::f64::consts::PI;

    fn flat_wall(amplitude: f64, nu: f64, p: u32) -> Trajectory {
        Trajectory::oscillating_wall(0.0, 1.0, amplitude, nu, p).unwrap()
    }

    #[test]
    fn static_is_exact_phase() {
        let cfg = CavityConfig::new(0.0, 1.0, 8).unwrap();
        let tr = Trajectory::stationary(0.0, 1.0, 3.3).unwrap();
        let out = integrate(&tr, &cfg, &IntegrationSettings::default()).unwrap();
        for i in 0..8 {
            assert_eq!(out.transform.alpha[(i, i)], cis(cfg.frequencies()[i] * 3.3));
        }
        assert_eq!(max_abs(&out.transform.beta), 0.0);
        assert!(out.residuals.0 < 1e-15 && out.residuals.1 < 1e-15);
    }

    #[test]
    fn group_structure_is_preserved() {
        let cfg = CavityConfig::new(0.0, 1.0, 12).unwrap();
        let tr = flat_wall(0.01, 2.0 * PI, 4);
        let out = integrate(&tr, &cfg, &IntegrationSettings::fixed(400, Method::Magnus4)).unwrap();
        let (r1, r2) = identity_residuals(&out.transform, 12).unwrap();
        assert!(r1 < 1e-12 && r2 < 1e-12, "{r1} {r2}");
    }

    #[test]
    fn fourth_order_convergence() {
        let cfg = CavityConfig::new(0.0, 1.0, 4).unwrap();
        let tr = flat_wall(0.05, 5.0, 2);
        for method in [Method::Magnus4, Method::Rk4] {
            let run = |k| integrate(&tr, &cfg, &IntegrationSettings::fixed(k, method)).unwrap().transform;
            let (a, b, d) = (run(40), run(80), run(160));
            let ratio = block_difference(&a, &b) / block_difference(&b, &d);
            assert!((ratio - 16.0).abs() < 2.0, "{method:?}: {ratio}");
        }
    }

    #[test]
    fn methods_agree() {
        let cfg = CavityConfig::new(0.0, 1.0, 6).unwrap();
        let tr = flat_wall(1e-3, 2.2, 4);
        let a = integrate(&tr, &cfg, &IntegrationSettings { method: Method::Magnus4, ..IntegrationSettings::adaptive(1e-11) }).unwrap();
        let b = integrate(&tr, &cfg, &IntegrationSettings { method: Method::Rk4, ..IntegrationSettings::adaptive(1e-11) }).unwrap();
        assert!(block_difference(&a.transform, &b.transform) < 1e-9);
    }

    #[test]
    fn agrees_with_first_order_at_small_amplitude() {
        let cfg = CavityConfig::new(0.0, 1.0, 10).unwrap();
        let tr = flat_wall(1e-3, 2.2, 4);
        let out = integrate(&tr, &cfg, &IntegrationSettings::adaptive(1e-12)).unwrap();
        let dyson = dyson_transform(&tr, &cfg, &FrequencyMatrix::from_config(&cfg), &AdaptiveQuadrature::default()).unwrap();
        let ((m, n), b) = dyson.transform.dominant_beta(10);
        let rel = (out.transform.beta_at(m, n) - b).norm() / b.norm();
        assert!(rel < 0.01, "{rel}");
    }

    #[test]
    fn frozen_and_instantaneous_differ_at_order_epsilon() {
        let cfg = CavityConfig::new(0.0, 1.0, 8).unwrap();
        let tr = flat_wall(1e-3, 2.2, 4);
        let live = integrate(&tr, &cfg, &IntegrationSettings::adaptive(1e-12)).unwrap();
        let frozen =
            integrate(&tr, &cfg, &IntegrationSettings { recompute_couplings: false, ..IntegrationSettings::adaptive(1e-12) })
                .unwrap();
        let ((m, n), b) = live.transform.dominant_beta(8);
        let rel = (frozen.transform.beta_at(m, n) - b).norm() / b.norm();
        assert!(rel > 0.0 && rel < 10.0 * 1e-3, "{rel}");
    }

    #[test]
    fn linear_envelope_in_velocity_scale() {
        let cfg = CavityConfig::new(0.0, 1.0, 6).unwrap();
        let dominant = |a: f64| {
            let out = integrate(&flat_wall(a, 2.2, 4), &cfg, &IntegrationSettings::adaptive(1e-12)).unwrap();
            out.transform.beta_at(1, 1).norm()
        };
        let ratio = dominant(2e-4) / dominant(1e-4);
        assert!((ratio - 2.0).abs() < 2e-3, "{ratio}");
    }

    #[test]
    fn settings_validation() {
        let cfg = CavityConfig::new(0.0, 1.0, 2).unwrap();
        let tr = flat_wall(1e-3, 2.2, 4);
        assert!(integrate(&tr, &cfg, &IntegrationSettings::fixed(0, Method::Rk4)).is_err());
        assert!(integrate(&tr, &cfg, &IntegrationSettings::adaptive(-1.0)).is_err());
        let tight = IntegrationSettings {
            step_control: StepControl::Adaptive { tolerance: 1e-30, max_steps: 64 },
            ..IntegrationSettings::default()
        };
        assert!(matches!(integrate(&tr, &cfg, &tight), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn convergence_study_reports_grid() {
        let cfg = CavityConfig::new(0.0, 1.0, 4).unwrap();
        let tr = flat_wall(1e-3, 2.2, 4);
        let report = convergence_study(&tr, &cfg, &[4, 8, 16], &[200, 400], Method::Magnus4, 1e-3).unwrap();
        assert_eq!(report.entries.len(), 6);
        assert!(report.entry(8, 400).is_some());
        assert!(report.converged_at.is_some());
        assert!(convergence_study(&tr, &cfg, &[8, 4], &[10], Method::Magnus4, 1e-3).is_err());

        let still = Trajectory::stationary(0.0, 1.0, 1.0).unwrap();
        let one = convergence_study(&still, &cfg, &[1], &[10], Method::Magnus4, 1e-6).unwrap();
        assert_eq!(one.entries[0].tracked_beta, c(0.0, 0.0));
    }
}
