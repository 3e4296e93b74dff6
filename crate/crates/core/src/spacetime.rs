// SPDX-License-Identifier: Apache-2.0

//! Exterior Schwarzschild geometry in 1+1 dimensions (radial direction only).
//!
//! Geometric units, `c = G = 1`, so the mass enters only through the
//! Schwarzschild radius `r_s = 2M`. The metric `-f dt^2 + dr^2 / f` with
//! `f(r) = 1 - r_s / r` becomes conformally flat in the tortoise coordinate
//! `x = r + r_s ln(r / r_s - 1)`. Only the exterior `r > r_s` is supported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectories::{Boundary, Trajectory, TrajectoryKind};

const MAX_NEWTON_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildSpacetime {
    r_s: f64,
}

impl SchwarzschildSpacetime {
    pub fn new(r_s: f64) -> Result<Self> {
        if !(r_s.is_finite() && r_s >= 0.0) {
            return Err(Error::invalid(format!("Schwarzschild radius must be finite and >= 0, got {r_s}")));
        }
        Ok(Self { r_s })
    }

    pub fn flat() -> Self {
        Self { r_s: 0.0 }
    }

    pub fn r_s(&self) -> f64 {
        self.r_s
    }

    pub fn is_flat(&self) -> bool {
        self.r_s == 0.0
    }

    fn check_exterior(&self, r: f64, what: &str) -> Result<()> {
        if self.is_flat() && r.is_finite() {
            return Ok(());
        }
        if !(r.is_finite() && r > self.r_s) {
            return Err(Error::domain(format!("{what} = {r} is not outside the horizon r_s = {}", self.r_s)));
        }
        Ok(())
    }

    /// `f(r) = 1 - r_s / r`. In flat space any finite `r` is accepted.
    pub fn lapse(&self, r: f64) -> Result<f64> {
        self.check_exterior(r, "r")?;
        if self.is_flat() {
            return Ok(1.0);
        }
        Ok(1.0 - self.r_s / r)
    }

    /// `df/dr = r_s / r^2`.
    pub fn lapse_derivative(&self, r: f64) -> Result<f64> {
        self.check_exterior(r, "r")?;
        Ok(self.r_s / (r * r))
    }

    /// `x(r) = r + r_s ln(r / r_s - 1)`; the identity when `r_s = 0`.
    pub fn tortoise(&self, r: f64) -> Result<f64> {
        self.check_exterior(r, "r")?;
        if self.is_flat() {
            return Ok(r);
        }
        Ok(r + self.r_s * ((r - self.r_s) / self.r_s).ln())
    }

    /// Inverse of [`tortoise`](Self::tortoise).
    ///
    /// With `u = r / r_s - 1` and `w = ln u` the map becomes `e^w + w = x / r_s - 1`,
    /// which is convex and increasing in `w`; Newton's method started where the
    /// residual is positive then converges monotonically. A bisection step guards
    /// the bracket.
    pub fn inverse_tortoise(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("tortoise coordinate must be finite, got {x}")));
        }
        if self.is_flat() {
            if x <= 0.0 {
                return Err(Error::domain(format!("flat radial coordinate must be positive, got {x}")));
            }
            return Ok(x);
        }
        let xi = x / self.r_s - 1.0;
        let residual = |w: f64| w.exp() + w - xi;
        let (mut lo, mut hi) = if xi >= 1.0 { (0.0, xi.ln()) } else { (xi - 1.0, xi) };
        let mut w = hi;
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let g = residual(w);
            if g == 0.0 {
                return self.finish_inverse(w, x);
            }
            if g > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            let mut next = w - g / (w.exp() + 1.0);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - w).abs() <= 4.0 * f64::EPSILON * w.abs().max(1.0) {
                return self.finish_inverse(next, x);
            }
            w = next;
        }
        Err(Error::NumericalFailure(format!(
            "inverse tortoise did not converge for x = {x}, r_s = {} (bracket [{lo}, {hi}])",
            self.r_s
        )))
    }

    fn finish_inverse(&self, w: f64, x: f64) -> Result<f64> {
        let r = self.r_s * (1.0 + w.exp());
        if r <= self.r_s {
            return Err(Error::NumericalFailure(format!(
                "x = {x} lies closer to the horizon than double precision resolves (r_s = {})",
                self.r_s
            )));
        }
        Ok(r)
    }

    /// Proper time of a static observer at `r_e`: `tau = sqrt(f(r_e)) t`.
    pub fn proper_time(&self, r_e: f64, t: f64) -> Result<f64> {
        Ok(self.lapse(r_e)?.sqrt() * t)
    }
}

/// Maps a radial boundary trajectory `r_j(t)` into the tortoise coordinate.
///
/// Positions go through [`SchwarzschildSpacetime::tortoise`] and velocities pick
/// up the chain-rule factor `1 / f(r)`. In flat space the input is returned
/// unchanged.
pub fn radial_to_conformal(st: &SchwarzschildSpacetime, radial: &Trajectory) -> Result<Trajectory> {
    if st.is_flat() {
        return Ok(radial.clone());
    }
    if matches!(radial.kind(), TrajectoryKind::Tortoise { .. }) {
        return Err(Error::invalid("trajectory is already expressed in tortoise coordinates"));
    }
    let closest = radial.min_position(Boundary::Inner).min(radial.min_position(Boundary::Outer));
    if closest <= st.r_s() {
        return Err(Error::domain(format!(
            "trajectory reaches r = {closest}, at or inside the horizon r_s = {}",
            st.r_s()
        )));
    }
    Trajectory::new(TrajectoryKind::Tortoise { radial: Box::new(radial.clone()), spacetime: *st }, radial.duration())
}
