// SPDX-License-Identifier: Apache-2.0

//! First-order Dyson coefficients and the closed forms of the driven-wall
//! experiment.
//!
//! To first order in the wall velocities,
//!
//! ```text
//! alpha_mn = e^{i w_m T} [ d_mn (1 + i Int dw_m dt) + sum_j A^(j)_mn Int e^{-i(w_m - w_n) t} x_j' dt ]
//! beta_mn  = e^{i w_m T}   sum_j B^(j)_mn Int e^{-i(w_m + w_n) t} x_j' dt
//! ```
//!
//! where `dw_m(t) = -w_m (L(t) - L0) / L0` is the linearized frequency shift of
//! the instantaneous cavity.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, CMatrix};
use crate::modes::{coupling_matrices, CavityConfig};
use crate::quadrature::{oscillation_panels, AdaptiveQuadrature};
use crate::spacetime::SchwarzschildSpacetime;
use crate::symplectic::{BogoliubovTransform, FrequencyMatrix};
use crate::trajectories::{Boundary, OscillatingScenario, Trajectory};

const SLOW_MOTION_WARNING: f64 = 0.1;
const POLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbativeResult {
    pub transform: BogoliubovTransform,
    /// Largest wall speed `max |dx_j/dt|`.
    pub max_speed: f64,
    /// Largest relative length change `max |L(t) - L0| / L0`.
    pub epsilon: f64,
    /// Bound on the quadrature error of any single coefficient.
    pub quadrature_error: f64,
}

/// Oscillatory integrals `Int_0^T e^{-i kappa t} x_j'(t) dt`, memoized by `kappa`.
struct VelocityTransforms<'a> {
    traj: &'a Trajectory,
    boundary: Boundary,
    quad: &'a AdaptiveQuadrature,
    cache: BTreeMap<u64, (Complex64, f64)>,
}

impl<'a> VelocityTransforms<'a> {
    fn new(traj: &'a Trajectory, boundary: Boundary, quad: &'a AdaptiveQuadrature) -> Self {
        Self { traj, boundary, quad, cache: BTreeMap::new() }
    }

    fn get(&mut self, kappa: f64) -> Result<(Complex64, f64)> {
        let key = (kappa + 0.0).to_bits();
        if let Some(hit) = self.cache.get(&key) {
            return Ok(*hit);
        }
        let t_end = self.traj.duration();
        let panels = oscillation_panels(0.0, t_end, kappa.abs() + self.traj.characteristic_frequency());
        let (traj, boundary) = (self.traj, self.boundary);
        let r = self.quad.integrate(|t| cis(-kappa * t) * traj.state(boundary, t).1, 0.0, t_end, panels)?;
        self.cache.insert(key, (r.value, r.error));
        Ok((r.value, r.error))
    }
}

/// First-order Bogoliubov coefficients for an arbitrary slow trajectory.
///
/// `frequencies` supplies the `w_m` used in the phases; for a cavity in flat
/// coordinates pass [`FrequencyMatrix::from_config`].
pub fn dyson_transform(
    traj: &Trajectory,
    config: &CavityConfig,
    frequencies: &FrequencyMatrix,
    quad: &AdaptiveQuadrature,
) -> Result<PerturbativeResult> {
    let n = config.n_modes();
    if frequencies.len() != n {
        return Err(Error::invalid(format!(
            "{} frequencies supplied for {n} modes",
            frequencies.len()
        )));
    }
    let report = traj.validate();
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::invalid(format!("trajectory rejected: {}", list.join("; "))));
    }
    let l0 = config.length();
    let t_end = traj.duration();
    let epsilon = (0..=400)
        .map(|k| t_end * k as f64 / 400.0)
        .map(|t| {
            let l = traj.state(Boundary::Outer, t).0 - traj.state(Boundary::Inner, t).0;
            (l - l0).abs() / l0
        })
        .fold(0.0, f64::max);
    if report.max_speed > SLOW_MOTION_WARNING || epsilon > SLOW_MOTION_WARNING {
        log::warn!(
            "first-order coefficients requested for fast or large motion (max speed {:.3}, epsilon {:.3})",
            report.max_speed,
            epsilon
        );
    }

    let w = frequencies.omegas();
    let couplings = coupling_matrices(config);
    let moving: Vec<(Boundary, &crate::linalg::RMatrix, &crate::linalg::RMatrix)> = [
        (Boundary::Inner, &couplings.a1, &couplings.b1),
        (Boundary::Outer, &couplings.a2, &couplings.b2),
    ]
    .into_iter()
    .filter(|(b, _, _)| !traj.boundary_is_fixed(*b))
    .collect();

    // Int (L(t) - L0) dt drives the first-order frequency shift
    let (length_excess, length_error) = if moving.is_empty() {
        (0.0, 0.0)
    } else {
        let panels = oscillation_panels(0.0, t_end, traj.characteristic_frequency());
        quad.integrate_real(
            |t| traj.state(Boundary::Outer, t).0 - traj.state(Boundary::Inner, t).0 - l0,
            0.0,
            t_end,
            panels,
        )?
    };

    let mut alpha = CMatrix::zeros(n, n);
    let mut beta = CMatrix::zeros(n, n);
    let mut worst_error = length_error * w[n - 1] / l0;
    for i in 0..n {
        alpha[(i, i)] = c(1.0, -w[i] * length_excess / l0);
    }
    for (boundary, a, b) in &moving {
        let mut transforms = VelocityTransforms::new(traj, *boundary, quad);
        for i in 0..n {
            for j in 0..n {
                let (sum_int, sum_err) = transforms.get(w[i] + w[j])?;
                beta[(i, j)] += sum_int * b[(i, j)];
                worst_error = worst_error.max(sum_err * b[(i, j)].abs());
                if i != j {
                    let (diff_int, diff_err) = transforms.get(w[i] - w[j])?;
                    alpha[(i, j)] += diff_int * a[(i, j)];
                    worst_error = worst_error.max(diff_err * a[(i, j)].abs());
                }
            }
        }
    }
    for i in 0..n {
        let phase = cis(w[i] * t_end);
        for j in 0..n {
            alpha[(i, j)] *= phase;
            beta[(i, j)] *= phase;
        }
    }
    Ok(PerturbativeResult {
        transform: BogoliubovTransform::new(alpha, beta)?,
        max_speed: report.max_speed,
        epsilon,
        quadrature_error: worst_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResonanceBranch {
    /// `nu = w_q + w_r`.
    Main,
    /// `nu = (w_q + w_r) / 2`, present only with curvature.
    Subharmonic,
}

impl ResonanceBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResonanceBranch::Main => "main",
            ResonanceBranch::Subharmonic => "subharmonic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResonanceSpec {
    pub q: usize,
    pub r: usize,
    pub branch: ResonanceBranch,
}

impl ResonanceSpec {
    pub fn new(q: usize, r: usize, branch: ResonanceBranch) -> Result<Self> {
        if q == 0 || r == 0 {
            return Err(Error::invalid(format!("resonance mode labels start at 1, got ({q}, {r})")));
        }
        Ok(Self { q, r, branch })
    }

    /// Driving frequency that hits this resonance for the cavity of `template`.
    pub fn driving_frequency(&self, template: &OscillatingScenario, st: &SchwarzschildSpacetime) -> Result<f64> {
        let sum = template.base_frequency(st, self.q)? + template.base_frequency(st, self.r)?;
        Ok(match self.branch {
            ResonanceBranch::Main => sum,
            ResonanceBranch::Subharmonic => 0.5 * sum,
        })
    }

    /// `template` with `nu` set exactly on the resonance (and `T = p pi / nu`).
    pub fn scenario(&self, template: &OscillatingScenario, st: &SchwarzschildSpacetime) -> Result<OscillatingScenario> {
        template.with_nu(self.driving_frequency(template, st)?)
    }
}

/// Which expression produced a closed-form value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationBranch {
    Regular,
    MainLimit,
    SubharmonicLimit,
}

impl EvaluationBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvaluationBranch::Regular => "regular",
            EvaluationBranch::MainLimit => "main-limit",
            EvaluationBranch::SubharmonicLimit => "subharmonic-limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormBeta {
    pub value: Complex64,
    pub branch: EvaluationBranch,
}

fn check_scenario(scenario: &OscillatingScenario, st: &SchwarzschildSpacetime) -> Result<()> {
    if st.is_flat() {
        return Ok(());
    }
    if scenario.r0 <= st.r_s() {
        return Err(Error::domain(format!(
            "inner wall r0 = {} must lie outside r_s = {}",
            scenario.r0,
            st.r_s()
        )));
    }
    if scenario.r0 + scenario.l0 - scenario.amplitude.abs() <= st.r_s() {
        return Err(Error::domain("outer wall reaches the horizon"));
    }
    Ok(())
}

/// `beta_mn` of the driven wall to first order in `epsilon` and in `r_s / r`.
///
/// The bracket holds the flat-space term, resonant at `nu = Sigma = w_m + w_n`,
/// and the curvature term
/// `(A r_s / R^2) (nu / Sigma) (e^{i Sigma T} - 1) / (4 ((Sigma/2)^2 - nu^2))`
/// with `R = r0 + L0`, resonant at `nu = Sigma / 2`. Within a relative
/// distance 1e-9 of either pole the expression is replaced by its analytic
/// limit in `nu` (with `T = p pi / nu` following `nu`), but only when
/// `resonant` is set; otherwise a [`Error::RemovableSingularity`] is returned.
pub fn oscillating_beta_closed_form(
    scenario: &OscillatingScenario,
    st: &SchwarzschildSpacetime,
    m: usize,
    n: usize,
    resonant: bool,
) -> Result<ClosedFormBeta> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("mode labels start at 1"));
    }
    check_scenario(scenario, st)?;
    let (nu, t_end, p) = (scenario.nu, scenario.duration(), scenario.p);
    let wm = scenario.base_frequency(st, m)?;
    let wn = scenario.base_frequency(st, n)?;
    let sigma = wm + wn;
    let f0 = st.lapse(scenario.r0)?;
    let radius = scenario.r0 + scenario.l0;
    let f_outer = st.lapse(radius)?;
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    let curvature = scenario.amplitude * st.r_s() / (radius * radius);

    let at_main = (nu - sigma).abs() < POLE_TOLERANCE * nu;
    let at_sub = curvature != 0.0 && (nu - 0.5 * sigma).abs() < POLE_TOLERANCE * nu;
    if (at_main || at_sub) && !resonant {
        return Err(Error::RemovableSingularity {
            nu,
            resonance: if at_main { "main" } else { "subharmonic" },
        });
    }

    let flat_term = if at_main {
        c(sign * t_end / (2.0 * sigma), 0.0)
    } else {
        Complex64::i() * (sign - cis(sigma * t_end)) / (sigma * sigma - nu * nu)
    };
    let curved_term = if curvature == 0.0 {
        c(0.0, 0.0)
    } else if at_sub {
        c(0.0, curvature * t_end / (4.0 * sigma))
    } else {
        let half = 0.5 * sigma;
        curvature * (nu / sigma) * 0.25 * (cis(sigma * t_end) - 1.0) / (half * half - nu * nu)
    };
    let prefactor = cis(-wn * t_end) * scenario.epsilon() * nu * (wm * wn).sqrt() * f0 / f_outer;
    let branch = if at_main {
        EvaluationBranch::MainLimit
    } else if at_sub {
        EvaluationBranch::SubharmonicLimit
    } else {
        EvaluationBranch::Regular
    };
    Ok(ClosedFormBeta { value: prefactor * (flat_term + curved_term), branch })
}

/// Resonant particle number `1/4 (1 - 2 L0 r_s / r0^2) m n (epsilon w_1 T)^2`
/// when `m + n = q + r`, zero otherwise. `w_1 = f(r0) pi / L0`.
pub fn resonant_particle_number(
    scenario: &OscillatingScenario,
    st: &SchwarzschildSpacetime,
    spec: &ResonanceSpec,
    m: usize,
    n: usize,
) -> Result<f64> {
    if spec.branch != ResonanceBranch::Main {
        return Err(Error::invalid("the particle-number formula applies to the main resonance"));
    }
    if m == 0 || n == 0 {
        return Err(Error::invalid("mode labels start at 1"));
    }
    check_scenario(scenario, st)?;
    let t_end = scenario.duration();
    if scenario.nu * t_end < 20.0 {
        log::warn!("nu T = {:.2} is small; the long-time resonance formula is inaccurate", scenario.nu * t_end);
    }
    if m + n != spec.q + spec.r {
        return Ok(0.0);
    }
    let w1 = scenario.base_frequency(st, 1)?;
    let reduction = if st.is_flat() { 1.0 } else { 1.0 - 2.0 * scenario.l0 * st.r_s() / (scenario.r0 * scenario.r0) };
    let growth = scenario.epsilon() * w1 * t_end;
    Ok(0.25 * reduction * (m * n) as f64 * growth * growth)
}

/// The two bracket terms of the subharmonic coefficient, each including the
/// common prefactor: `(drive, curvature)`. The first vanishes for even `p`.
pub fn subharmonic_terms(
    scenario: &OscillatingScenario,
    st: &SchwarzschildSpacetime,
    q: usize,
    r: usize,
) -> Result<(Complex64, Complex64)> {
    if q == 0 || r == 0 {
        return Err(Error::invalid("mode labels start at 1"));
    }
    check_scenario(scenario, st)?;
    let eps = scenario.epsilon();
    let f0 = st.lapse(scenario.r0)?;
    let radius = scenario.r0 + scenario.l0;
    let f_outer = st.lapse(radius)?;
    let t_end = scenario.duration();
    let wq = scenario.base_frequency(st, q)?;
    let parity = if scenario.p % 2 == 0 { 0.0 } else { 2.0 };
    let prefactor = cis(-wq * t_end) * Complex64::i() * eps * ((q * r) as f64).sqrt() * f0 * f0 / f_outer;
    let drive = -(2.0 / 3.0) * parity / (f0 * (q + r) as f64);
    let curvature = eps * (PI / 8.0) * st.r_s() * t_end / (radius * radius);
    Ok((prefactor * drive, prefactor * curvature))
}

/// `beta_qr` at the subharmonic resonance `nu = (w_q + w_r) / 2`; the caller
/// constructs the scenario on resonance (see [`ResonanceSpec::scenario`]).
pub fn subharmonic_beta(scenario: &OscillatingScenario, st: &SchwarzschildSpacetime, q: usize, r: usize) -> Result<Complex64> {
    let (drive, curvature) = subharmonic_terms(scenario, st, q, r)?;
    Ok(drive + curvature)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub nu: f64,
    pub m: usize,
    pub n: usize,
    pub beta: Complex64,
    pub branch: EvaluationBranch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPeak {
    pub m: usize,
    pub n: usize,
    pub nu: f64,
    pub abs_beta: f64,
    /// Resonance whose pole lies within one grid step of the peak, if any.
    pub resonance: Option<ResonanceBranch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan {
    pub rows: Vec<ScanRow>,
    pub peaks: Vec<ScanPeak>,
}

impl ResonanceScan {
    /// CSV with columns `nu,m,n,abs_beta,re_beta,im_beta,branch`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nu,m,n,abs_beta,re_beta,im_beta,branch\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:.17e},{},{},{:.17e},{:.17e},{:.17e},{}",
                row.nu,
                row.m,
                row.n,
                row.beta.norm(),
                row.beta.re,
                row.beta.im,
                row.branch.as_str()
            );
        }
        out
    }

    pub fn peaks_for(&self, m: usize, n: usize) -> impl Iterator<Item = &ScanPeak> {
        self.peaks.iter().filter(move |p| p.m == m && p.n == n)
    }
}

/// Settings for [`resonance_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Local maxima below this fraction of the largest `|beta|` of a mode pair
    /// are not reported as peaks (suppresses the side lobes).
    pub peak_fraction: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { workers: 0, peak_fraction: 0.3 }
    }
}

/// Closed-form `|beta_mn(nu)|` on a grid of driving frequencies for each
/// requested mode pair. Grid points on a pole use the limit branch. Rows are
/// ordered by pair, then by grid index.
pub fn resonance_scan(
    template: &OscillatingScenario,
    st: &SchwarzschildSpacetime,
    nu_grid: &[f64],
    pairs: &[(usize, usize)],
    options: &ScanOptions,
) -> Result<ResonanceScan> {
    if nu_grid.is_empty() || pairs.is_empty() {
        return Err(Error::invalid("scan needs at least one frequency and one mode pair"));
    }
    if nu_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("scan frequencies must be strictly increasing"));
    }
    let jobs: Vec<(usize, usize, f64)> =
        pairs.iter().flat_map(|&(m, n)| nu_grid.iter().map(move |&nu| (m, n, nu))).collect();
    let evaluate = || -> Result<Vec<ScanRow>> {
        jobs.par_iter()
            .map(|&(m, n, nu)| {
                let s = template.with_nu(nu)?;
                let v = oscillating_beta_closed_form(&s, st, m, n, true)?;
                Ok(ScanRow { nu, m, n, beta: v.value, branch: v.branch })
            })
            .collect()
    };
    let rows = if options.workers == 0 {
        evaluate()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::NumericalFailure(format!("cannot start worker pool: {e}")))?
            .install(evaluate)?
    };

    let mut peaks = Vec::new();
    for (k, &(m, n)) in pairs.iter().enumerate() {
        let block = &rows[k * nu_grid.len()..(k + 1) * nu_grid.len()];
        let mags: Vec<f64> = block.iter().map(|r| r.beta.norm()).collect();
        let top = mags.iter().cloned().fold(0.0, f64::max);
        let sigma = template.base_frequency(st, m)? + template.base_frequency(st, n)?;
        for i in 1..mags.len().saturating_sub(1) {
            if mags[i] > mags[i - 1] && mags[i] >= mags[i + 1] && mags[i] >= options.peak_fraction * top && top > 0.0 {
                let window = (nu_grid[i + 1] - nu_grid[i - 1]).abs();
                let resonance = if (nu_grid[i] - sigma).abs() <= window {
                    Some(ResonanceBranch::Main)
                } else if (nu_grid[i] - 0.5 * sigma).abs() <= window {
                    Some(ResonanceBranch::Subharmonic)
                } else {
                    None
                };
                peaks.push(ScanPeak { m, n, nu: nu_grid[i], abs_beta: mags[i], resonance });
            }
        }
    }
    Ok(ResonanceScan { rows, peaks })
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo && lo > 0.0) || count < 2 {
        return Err(Error::invalid(format!("bad scan grid [{lo}, {hi}] with {count} points")));
    }
    Ok((0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::identity_residuals;
    use approx::assert_relative_eq;

    fn flat() -> SchwarzschildSpacetime {
        SchwarzschildSpacetime::flat()
    }

    #[test]
    fn static_trajectory_is_pure_phase() {
        let cfg = CavityConfig::new(0.0, 1.0, 6).unwrap();
        let tr = Trajectory::stationary(0.0, 1.0, 2.7).unwrap();
        let res = dyson_transform(&tr, &cfg, &FrequencyMatrix::from_config(&cfg), &AdaptiveQuadrature::default()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(res.transform.beta[(i, j)], c(0.0, 0.0));
                let expected = if i == j { cis(cfg.frequencies()[i] * 2.7) } else { c(0.0, 0.0) };
                assert_eq!(res.transform.alpha[(i, j)], expected);
            }
        }
        assert_eq!(res.quadrature_error, 0.0);
    }

    #[test]
    fn rejects_superluminal_and_mismatched_frequencies() {
        let cfg = CavityConfig::new(0.0, 1.0, 3).unwrap();
        let fast = Trajectory::oscillating_wall(0.0, 1.0, 0.2, 10.0, 2).unwrap();
        let q = AdaptiveQuadrature::default();
        assert!(matches!(
            dyson_transform(&fast, &cfg, &FrequencyMatrix::from_config(&cfg), &q),
            Err(Error::InvalidArgument(_))
        ));
        let slow = Trajectory::oscillating_wall(0.0, 1.0, 0.001, 1.0, 2).unwrap();
        let w = FrequencyMatrix::new(vec![1.0, 2.0]).unwrap();
        assert!(dyson_transform(&slow, &cfg, &w, &q).is_err());
    }

    #[test]
    fn flat_oscillating_wall_matches_closed_form() {
        // off resonance: nu = pi, m = n = 1, T = 2 pi / nu
        let scenario = OscillatingScenario::new(0.0, 1.0, 1e-3, PI, 2).unwrap();
        let cfg = CavityConfig::new(0.0, 1.0, 6).unwrap();
        let res = dyson_transform(
            &scenario.radial_trajectory().unwrap(),
            &cfg,
            &FrequencyMatrix::from_config(&cfg),
            &AdaptiveQuadrature::default(),
        )
        .unwrap();
        for m in 1..=6 {
            for n in 1..=6 {
                let closed = oscillating_beta_closed_form(&scenario, &flat(), m, n, false).unwrap();
                assert_eq!(closed.branch, EvaluationBranch::Regular);
                let d = (closed.value - res.transform.beta_at(m, n)).norm();
                assert!(d < 1e-8 && d < 10.0 * res.quadrature_error.max(1e-15), "({m},{n}): {d}");
            }
        }
    }

    #[test]
    fn identity_residuals_scale_with_epsilon_squared() {
        let cfg = CavityConfig::new(0.0, 1.0, 20).unwrap();
        let q = AdaptiveQuadrature::default();
        let run = |a: f64| {
            // slow drive: the second-order terms grow like (w_m A nu / (w_m - w_n - nu))^2
            let tr = Trajectory::oscillating_wall(0.0, 1.0, a, 0.1, 2).unwrap();
            let r = dyson_transform(&tr, &cfg, &FrequencyMatrix::from_config(&cfg), &q).unwrap();
            identity_residuals(&r.transform, 10).unwrap()
        };
        let (a1, a2) = run(1e-3);
        assert!(a1 < 5e-6 && a2 < 5e-6, "{a1} {a2}");
        let (b1, b2) = run(5e-4);
        assert_relative_eq!(a1 / b1, 4.0, max_relative = 0.05);
        assert_relative_eq!(a2 / b2, 4.0, max_relative = 0.05);
    }

    #[test]
    fn beta_symmetry_pattern() {
        // e^{-i w_m T} beta_mn is symmetric because B is
        let cfg = CavityConfig::new(0.0, 1.0, 5).unwrap();
        let tr = Trajectory::oscillating_wall(0.0, 1.0, 1e-3, 1.7, 3).unwrap();
        let r = dyson_transform(&tr, &cfg, &FrequencyMatrix::from_config(&cfg), &AdaptiveQuadrature::default()).unwrap();
        let w = cfg.frequencies();
        let t_end = tr.duration();
        for i in 0..5 {
            for j in 0..5 {
                let u = r.transform.beta[(i, j)] * cis(-w[i] * t_end);
                let v = r.transform.beta[(j, i)] * cis(-w[j] * t_end);
                assert!((u - v).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_curvature_drops_second_term() {
        let s = OscillatingScenario::new(5.0, 1.0, 1e-3, 2.0, 4).unwrap();
        let st = SchwarzschildSpacetime::new(0.0).unwrap();
        let v = oscillating_beta_closed_form(&s, &st, 1, 2, false).unwrap().value;
        let wm = PI;
        let wn = 2.0 * PI;
        let sigma = wm + wn;
        let t_end = s.duration();
        let expected =
            cis(-wn * t_end) * 1e-3 * 2.0 * (wm * wn).sqrt() * Complex64::i() * (1.0 - cis(sigma * t_end)) / (sigma * sigma - 4.0);
        assert!((v - expected).norm() < 1e-16);
    }

    #[test]
    fn main_resonance_limit_magnitude() {
        let template = OscillatingScenario::new(0.0, 1.0, 1e-3, 1.0, 40).unwrap();
        let spec = ResonanceSpec::new(1, 2, ResonanceBranch::Main).unwrap();
        let s = spec.scenario(&template, &flat()).unwrap();
        let err = oscillating_beta_closed_form(&s, &flat(), 1, 2, false).unwrap_err();
        assert!(matches!(err, Error::RemovableSingularity { resonance: "main", .. }));
        let v = oscillating_beta_closed_form(&s, &flat(), 1, 2, true).unwrap();
        assert_eq!(v.branch, EvaluationBranch::MainLimit);
        let expected = 0.5 * 1e-3 * (2.0f64).sqrt() * PI * s.duration();
        assert_relative_eq!(v.value.norm(), expected, max_relative = 1e-14);
    }

    #[test]
    fn limits_are_continuous() {
        let st = SchwarzschildSpacetime::new(0.5).unwrap();
        let template = OscillatingScenario::new(4.0, 1.0, 1e-2, 1.0, 6).unwrap();
        for branch in [ResonanceBranch::Main, ResonanceBranch::Subharmonic] {
            let spec = ResonanceSpec::new(2, 3, branch).unwrap();
            let nu0 = spec.driving_frequency(&template, &st).unwrap();
            let at = oscillating_beta_closed_form(&template.with_nu(nu0).unwrap(), &st, 2, 3, true).unwrap();
            assert_ne!(at.branch, EvaluationBranch::Regular);
            // Richardson on symmetric offsets removes the linear term
            let h = 1e-4 * nu0;
            let side = |d: f64| oscillating_beta_closed_form(&template.with_nu(nu0 + d).unwrap(), &st, 2, 3, false).unwrap().value;
            let mid = (side(h) + side(-h)) * 0.5;
            let mid2 = (side(2.0 * h) + side(-2.0 * h)) * 0.5;
            let extrapolated = (mid * 4.0 - mid2) / 3.0;
            assert!((extrapolated - at.value).norm() < 1e-7 * at.value.norm(), "{branch:?}");
        }
    }

    #[test]
    fn subharmonic_formula_matches_closed_form_limit() {
        let st = SchwarzschildSpacetime::new(0.3).unwrap();
        for p in [4u32, 5] {
            let template = OscillatingScenario::new(3.0, 1.0, 1e-2, 1.0, p).unwrap();
            let spec = ResonanceSpec::new(1, 2, ResonanceBranch::Subharmonic).unwrap();
            let s = spec.scenario(&template, &st).unwrap();
            let closed = oscillating_beta_closed_form(&s, &st, 1, 2, true).unwrap();
            assert_eq!(closed.branch, EvaluationBranch::SubharmonicLimit);
            let sub = subharmonic_beta(&s, &st, 1, 2).unwrap();
            assert_relative_eq!(sub.norm(), closed.value.norm(), max_relative = 1e-12);
            let (drive, _) = subharmonic_terms(&s, &st, 1, 2).unwrap();
            assert_eq!(drive.norm() == 0.0, p % 2 == 0);
        }
        let s = OscillatingScenario::new(3.0, 1.0, 1e-2, 1.5 * PI, 4).unwrap();
        assert_eq!(subharmonic_beta(&s, &flat(), 1, 2).unwrap().norm(), 0.0);
    }

    #[test]
    fn curvature_term_grows_linearly_in_duration() {
        let st = SchwarzschildSpacetime::new(0.3).unwrap();
        let spec = ResonanceSpec::new(1, 2, ResonanceBranch::Subharmonic).unwrap();
        let mags: Vec<f64> = [10u32, 20, 40]
            .iter()
            .map(|&p| {
                let s = spec.scenario(&OscillatingScenario::new(3.0, 1.0, 1e-2, 1.0, p).unwrap(), &st).unwrap();
                subharmonic_beta(&s, &st, 1, 2).unwrap().norm()
            })
            .collect();
        assert_relative_eq!(mags[1] / mags[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(mags[2] / mags[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn particle_number_examples() {
        let spec = ResonanceSpec::new(1, 2, ResonanceBranch::Main).unwrap();
        // T = 100 with nu = 3 pi means p = 300
        let s = OscillatingScenario::new(0.0, 1.0, 1e-3, 3.0 * PI, 300).unwrap();
        assert_relative_eq!(s.duration(), 100.0, max_relative = 1e-15);
        let v = resonant_particle_number(&s, &flat(), &spec, 1, 2).unwrap();
        assert_relative_eq!(v, 0.25 * 2.0 * (1e-3 * PI * 100.0f64).powi(2), max_relative = 1e-14);
        assert_relative_eq!(v, 0.049_348_022, max_relative = 1e-7);
        assert_eq!(resonant_particle_number(&s, &flat(), &spec, 1, 3).unwrap(), 0.0);

        let st = SchwarzschildSpacetime::new(0.01).unwrap();
        let curved = OscillatingScenario::new(10.0, 1.0, 1e-3, 3.0 * PI, 300).unwrap();
        let ratio = resonant_particle_number(&curved, &st, &spec, 1, 2).unwrap()
            / resonant_particle_number(&curved, &flat(), &spec, 1, 2).unwrap();
        assert!(ratio < 1.0);
        let f = st.lapse(10.0).unwrap();
        assert_relative_eq!(ratio, (1.0 - 2.0 * 0.01 / 100.0) * f * f, max_relative = 1e-14);
    }

    #[test]
    fn flat_scan_has_single_main_peak() {
        let template = OscillatingScenario::new(0.0, 1.0, 1e-3, 1.0, 60).unwrap();
        let sigma = 3.0 * PI;
        let mut grid = linear_grid(0.97 * sigma, 1.03 * sigma, 601).unwrap();
        grid[300] = sigma;
        let scan = resonance_scan(&template, &flat(), &grid, &[(1, 2)], &ScanOptions::default()).unwrap();
        let peaks: Vec<_> = scan.peaks_for(1, 2).collect();
        assert_eq!(peaks.len(), 1, "{peaks:?}");
        assert_eq!(peaks[0].resonance, Some(ResonanceBranch::Main));
        assert_eq!(scan.rows[300].branch, EvaluationBranch::MainLimit);
        let csv = scan.to_csv();
        assert!(csv.starts_with("nu,m,n,abs_beta,re_beta,im_beta,branch\n"));
        assert_eq!(csv.lines().count(), 602);
    }

    #[test]
    fn scan_is_independent_of_worker_count() {
        let st = SchwarzschildSpacetime::new(0.2).unwrap();
        let template = OscillatingScenario::new(2.0, 1.0, 1e-2, 1.0, 8).unwrap();
        let grid = linear_grid(0.5, 12.0, 97).unwrap();
        let pairs = [(1, 1), (1, 2), (2, 3)];
        let one = resonance_scan(&template, &st, &grid, &pairs, &ScanOptions { workers: 1, ..Default::default() }).unwrap();
        let four = resonance_scan(&template, &st, &grid, &pairs, &ScanOptions { workers: 4, ..Default::default() }).unwrap();
        assert_eq!(one.to_csv(), four.to_csv());
        assert!(resonance_scan(&template, &st, &[2.0, 1.0], &pairs, &ScanOptions::default()).is_err());
    }
}
