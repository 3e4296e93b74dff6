// SPDX-License-Identifier: Apache-2.0

//! Instantaneous-mode method for cavities translated at constant length.
//!
//! The in-mode `m` is expanded in the normalized stationary modes of the
//! cavity at its current position, `phi_m = sum_n Q_mn(t) N_n sin(w_n (x - x_1(t)))`.
//! With `v = x_1'` and `a = x_1''` the amplitudes obey
//!
//! ```text
//! Q_mn'' + w_n^2 Q_mn = -2 w_n sum_p (2 v Q_mp' + a Q_mp) g_pn
//! ```
//!
//! Splitting `Q = Q0 + Q1` by order in the motion gives `Q0_mn = e^{-i w_m t} d_mn`
//! and a driven oscillator for `Q1`, solved here by variation of constants:
//!
//! ```text
//! Q1_mn(T) = Int_0^T sin(w_n (T - s)) / w_n F_mn(s) ds,
//! F_mn(s)  = -2 w_n g_mn (a(s) - 2 i w_m v(s)) e^{-i w_m s}.
//! ```
//!
//! Once the walls stop, `Q_mn(t) = at_mn e^{-i w_n t} + bt_mn e^{i w_n t}`;
//! matching value and slope at `T` gives the coefficients, and undoing the
//! free phase of the in-mode gives `alpha = e^{i w_m T} at`, `beta = e^{i w_m T} bt`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, CMatrix};
use crate::modes::{coupling_matrices, CavityConfig};
use crate::quadrature::{oscillation_panels, AdaptiveQuadrature};
use crate::symplectic::BogoliubovTransform;
use crate::trajectories::{Boundary, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState {
    pub q0: CMatrix,
    pub q1: CMatrix,
    /// Time derivatives of `q0` and `q1`.
    pub dq0: CMatrix,
    pub dq1: CMatrix,
    pub time: f64,
    /// Largest quadrature error estimate among the entries of `q1`, `dq1`.
    pub quadrature_error: f64,
}

/// `Int_0^T e^{-i kappa s} h(s) ds` for `h` the wall velocity or acceleration.
struct Transforms<'a> {
    traj: &'a Trajectory,
    quad: &'a AdaptiveQuadrature,
    velocity: BTreeMap<u64, (Complex64, f64)>,
    acceleration: BTreeMap<u64, (Complex64, f64)>,
}

impl<'a> Transforms<'a> {
    fn new(traj: &'a Trajectory, quad: &'a AdaptiveQuadrature) -> Self {
        Self { traj, quad, velocity: BTreeMap::new(), acceleration: BTreeMap::new() }
    }

    fn compute(traj: &Trajectory, quad: &AdaptiveQuadrature, kappa: f64, pick: usize) -> Result<(Complex64, f64)> {
        let t_end = traj.duration();
        let panels = oscillation_panels(0.0, t_end, kappa.abs() + traj.characteristic_frequency());
        let r = quad.integrate(
            |s| {
                let (_, v, a) = traj.state(Boundary::Inner, s);
                cis(-kappa * s) * if pick == 0 { v } else { a }
            },
            0.0,
            t_end,
            panels,
        )?;
        Ok((r.value, r.error))
    }

    fn velocity(&mut self, kappa: f64) -> Result<(Complex64, f64)> {
        let key = (kappa + 0.0).to_bits();
        if let Some(v) = self.velocity.get(&key) {
            return Ok(*v);
        }
        let v = Self::compute(self.traj, self.quad, kappa, 0)?;
        self.velocity.insert(key, v);
        Ok(v)
    }

    fn acceleration(&mut self, kappa: f64) -> Result<(Complex64, f64)> {
        let key = (kappa + 0.0).to_bits();
        if let Some(v) = self.acceleration.get(&key) {
            return Ok(*v);
        }
        let v = Self::compute(self.traj, self.quad, kappa, 1)?;
        self.acceleration.insert(key, v);
        Ok(v)
    }
}

fn require_rigid(traj: &Trajectory, config: &CavityConfig) -> Result<()> {
    if !traj.is_rigid() {
        return Err(Error::UnsupportedTrajectory(format!(
            "the instantaneous-mode method needs x2(t) - x1(t) constant; got a {} trajectory whose length varies",
            traj.kind_name()
        )));
    }
    let length = traj.state(Boundary::Outer, 0.0).0 - traj.state(Boundary::Inner, 0.0).0;
    if (length - config.length()).abs() > 1e-12 * config.length() {
        return Err(Error::invalid(format!(
            "trajectory length {length} differs from the configured cavity length {}",
            config.length()
        )));
    }
    Ok(())
}

/// Amplitudes `Q0`, `Q1` and their derivatives at the end of the motion.
pub fn evolve(traj: &Trajectory, config: &CavityConfig, quad: &AdaptiveQuadrature) -> Result<ScatteringState> {
    require_rigid(traj, config)?;
    let n = config.n_modes();
    let w = config.frequencies();
    let g = coupling_matrices(config).g;
    let t_end = traj.duration();
    let mut q0 = CMatrix::zeros(n, n);
    let mut dq0 = CMatrix::zeros(n, n);
    for i in 0..n {
        q0[(i, i)] = cis(-w[i] * t_end);
        dq0[(i, i)] = c(0.0, -w[i]) * q0[(i, i)];
    }
    let mut q1 = CMatrix::zeros(n, n);
    let mut dq1 = CMatrix::zeros(n, n);
    let mut worst = 0.0_f64;
    if !traj.boundary_is_fixed(Boundary::Inner) {
        let mut transforms = Transforms::new(traj, quad);
        for i in 0..n {
            for j in 0..n {
                if g[(i, j)] == 0.0 {
                    continue;
                }
                // I_minus and I_plus: Int e^{-+i w_n s} F_mn(s) ds
                let mut drive = |kappa: f64| -> Result<(Complex64, f64)> {
                    let (jv, ev) = transforms.velocity(kappa)?;
                    let (ja, ea) = transforms.acceleration(kappa)?;
                    let scale = -2.0 * w[j] * g[(i, j)];
                    let value = (ja - c(0.0, 2.0 * w[i]) * jv) * scale;
                    Ok((value, scale.abs() * (ea + 2.0 * w[i] * ev)))
                };
                let (i_minus, e_minus) = drive(w[i] + w[j])?;
                let (i_plus, e_plus) = drive(w[i] - w[j])?;
                let up = cis(w[j] * t_end) * i_minus;
                let down = cis(-w[j] * t_end) * i_plus;
                q1[(i, j)] = (up - down) / c(0.0, 2.0 * w[j]);
                dq1[(i, j)] = (up + down) * 0.5;
                worst = worst.max((e_minus + e_plus) * (1.0 + 1.0 / w[j]));
            }
        }
    }
    Ok(ScatteringState { q0, q1, dq0, dq1, time: t_end, quadrature_error: worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCoefficients {
    /// Matching coefficients `(at, bt)` of the out-mode form at `T`.
    pub matched: BogoliubovTransform,
    /// `(alpha, beta)` after undoing the free phase `e^{i w_m T}`.
    pub transform: BogoliubovTransform,
}

/// Matches `Q(T)`, `Q'(T)` to the stationary out-mode form.
pub fn extract_coefficients(state: &ScatteringState, config: &CavityConfig) -> Result<ScatteringCoefficients> {
    let n = config.n_modes();
    if state.q0.nrows() != n {
        return Err(Error::invalid(format!(
            "state holds {} modes but the cavity is truncated at {n}",
            state.q0.nrows()
        )));
    }
    let w = config.frequencies();
    let t_end = state.time;
    // Q0 is the free evolution and matches to at = 1, bt = 0 exactly; only the
    // first-order part goes through the formula, so static walls give beta = 0.
    let (q, dq) = (&state.q1, &state.dq1);
    let mut at = CMatrix::identity(n, n);
    let mut bt = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let slope = dq[(i, j)] * c(0.0, 1.0 / w[j]);
            at[(i, j)] += (q[(i, j)] + slope) * cis(w[j] * t_end) * 0.5;
            bt[(i, j)] = (q[(i, j)] - slope) * cis(-w[j] * t_end) * 0.5;
        }
    }
    let mut alpha = at.clone();
    let mut beta = bt.clone();
    for i in 0..n {
        let phase = cis(w[i] * t_end);
        for j in 0..n {
            alpha[(i, j)] *= phase;
            beta[(i, j)] *= phase;
        }
    }
    Ok(ScatteringCoefficients {
        matched: BogoliubovTransform::new(at, bt)?,
        transform: BogoliubovTransform::new(alpha, beta)?,
    })
}

/// `(alpha, beta)` assembled from the overlaps through
/// `A = -g (w_m + w_n)` and `B = g (w_m - w_n)` instead of the mode sums:
/// `alpha = e^{i w_m T} (d + A Int e^{-i(w_m - w_n)t} v)`,
/// `beta = e^{i w_m T} B Int e^{-i(w_m + w_n)t} v`.
pub fn coupling_form_coefficients(
    traj: &Trajectory,
    config: &CavityConfig,
    quad: &AdaptiveQuadrature,
) -> Result<BogoliubovTransform> {
    require_rigid(traj, config)?;
    let n = config.n_modes();
    let w = config.frequencies();
    let g = coupling_matrices(config).g;
    let t_end = traj.duration();
    let mut transforms = Transforms::new(traj, quad);
    let mut alpha = CMatrix::identity(n, n);
    let mut beta = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if g[(i, j)] == 0.0 {
                continue;
            }
            let a = -g[(i, j)] * (w[i] + w[j]);
            let b = g[(i, j)] * (w[i] - w[j]);
            alpha[(i, j)] += transforms.velocity(w[i] - w[j])?.0 * a;
            beta[(i, j)] = transforms.velocity(w[i] + w[j])?.0 * b;
        }
    }
    for i in 0..n {
        let phase = cis(w[i] * t_end);
        for j in 0..n {
            alpha[(i, j)] *= phase;
            beta[(i, j)] *= phase;
        }
    }
    BogoliubovTransform::new(alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::perturbative::dyson_transform;
    use crate::symplectic::FrequencyMatrix;

    fn quad() -> AdaptiveQuadrature {
        AdaptiveQuadrature::default()
    }

    #[test]
    fn zero_motion_is_pure_phase() {
        let cfg = CavityConfig::new(1.0, 2.0, 5).unwrap();
        let tr = Trajectory::rigid_translation(1.0, 1.0, 0.0, 0.0, 3.0, 2.5).unwrap();
        let state = evolve(&tr, &cfg, &quad()).unwrap();
        assert_eq!(max_abs(&state.q1), 0.0);
        let out = extract_coefficients(&state, &cfg).unwrap();
        let w = cfg.frequencies();
        for i in 0..5 {
            assert!((state.q0[(i, i)] - cis(-w[i] * 2.5)).norm() == 0.0);
            assert!((out.transform.alpha[(i, i)] - cis(w[i] * 2.5)).norm() < 1e-15);
        }
        assert!(max_abs(&out.transform.beta) < 1e-15);
    }

    #[test]
    fn rejects_length_changes() {
        let cfg = CavityConfig::new(0.0, 1.0, 3).unwrap();
        let tr = Trajectory::oscillating_wall(0.0, 1.0, 1e-3, 2.0, 2).unwrap();
        assert!(matches!(evolve(&tr, &cfg, &quad()), Err(Error::UnsupportedTrajectory(_))));
        let other = Trajectory::rigid_translation(0.0, 2.0, 0.01, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(evolve(&other, &cfg, &quad()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn even_parity_entries_vanish() {
        let cfg = CavityConfig::new(0.0, 1.0, 6).unwrap();
        let tr = Trajectory::rigid_translation(0.0, 1.0, 0.02, 0.005, 4.0, 3.0).unwrap();
        let state = evolve(&tr, &cfg, &quad()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if (i + j) % 2 == 0 {
                    assert_eq!(state.q1[(i, j)], c(0.0, 0.0));
                } else {
                    assert!(state.q1[(i, j)].norm() > 0.0);
                }
            }
        }
    }

    #[test]
    fn matches_dyson_and_coupling_form() {
        let cfg = CavityConfig::new(0.5, 1.5, 8).unwrap();
        let tr = Trajectory::rigid_translation(0.5, 1.0, 0.03, 0.004, 6.0, 4.0).unwrap();
        let scat = extract_coefficients(&evolve(&tr, &cfg, &quad()).unwrap(), &cfg).unwrap().transform;
        let dyson = dyson_transform(&tr, &cfg, &FrequencyMatrix::from_config(&cfg), &quad()).unwrap().transform;
        let coupled = coupling_form_coefficients(&tr, &cfg, &quad()).unwrap();
        assert!(max_abs(&(&scat.beta - &dyson.beta)) < 1e-10);
        assert!(max_abs(&(&scat.alpha - &dyson.alpha)) < 1e-10);
        assert!(max_abs(&(&scat.beta - &coupled.beta)) < 1e-10);
        assert!(max_abs(&(&scat.alpha - &coupled.alpha)) < 1e-10);
    }
}
