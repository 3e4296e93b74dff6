// SPDX-License-Identifier: Apache-2.0

//! Prescribed boundary worldlines `x_1(t)`, `x_2(t)` on `0 <= t <= T`.
//!
//! Every kind provides analytic positions, velocities and accelerations. The
//! time coordinate is the conformal (bookkeeping) time; convert to an
//! observer's proper time with [`SchwarzschildSpacetime::proper_time`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spacetime::SchwarzschildSpacetime;

const VALIDATION_SAMPLES: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `x_1`, the wall nearer the mass.
    Inner,
    /// `x_2`.
    Outer,
}

impl Boundary {
    pub fn from_index(j: usize) -> Result<Self> {
        match j {
            1 => Ok(Boundary::Inner),
            2 => Ok(Boundary::Outer),
            _ => Err(Error::invalid(format!("boundary index must be 1 or 2, got {j}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    Static {
        x1: f64,
        x2: f64,
    },
    /// `x_1 = r0`, `x_2 = r0 + l0 + amplitude sin(nu t)`.
    OscillatingWall {
        r0: f64,
        l0: f64,
        amplitude: f64,
        nu: f64,
    },
    /// Both walls follow `x_1(0) + d(t)` at fixed separation, with
    /// `d(t) = shift S(t/T) + wobble sin(frequency t) sin^4(pi t / T)` and `S` the
    /// quintic smoothstep. Velocity and acceleration vanish at both ends.
    RigidTranslation {
        x1_start: f64,
        length: f64,
        shift: f64,
        wobble: f64,
        frequency: f64,
    },
    /// Clamped cubic splines through sampled wall positions.
    Tabulated {
        inner: ClampedSpline,
        outer: ClampedSpline,
    },
    /// A radial trajectory seen through the tortoise map of `spacetime`.
    Tortoise {
        radial: Box<Trajectory>,
        spacetime: SchwarzschildSpacetime,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    kind: TrajectoryKind,
    duration: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(format!("{name} must be finite and positive, got {v}")));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, duration: f64) -> Result<Self> {
        positive("duration", duration)?;
        match &kind {
            TrajectoryKind::Static { x1, x2 } => {
                finite("x1", *x1)?;
                finite("x2", *x2)?;
                if x2 <= x1 {
                    return Err(Error::invalid(format!("static cavity needs x2 > x1, got [{x1}, {x2}]")));
                }
            }
            TrajectoryKind::OscillatingWall { r0, l0, amplitude, nu } => {
                finite("r0", *r0)?;
                positive("l0", *l0)?;
                finite("amplitude", *amplitude)?;
                positive("nu", *nu)?;
            }
            TrajectoryKind::RigidTranslation { x1_start, length, shift, wobble, frequency } => {
                finite("x1_start", *x1_start)?;
                positive("length", *length)?;
                finite("shift", *shift)?;
                finite("wobble", *wobble)?;
                finite("frequency", *frequency)?;
            }
            TrajectoryKind::Tabulated { inner, outer } => {
                for spline in [inner, outer] {
                    let (a, b) = spline.span();
                    if a != 0.0 || (b - duration).abs() > 1e-12 * duration {
                        return Err(Error::invalid(format!(
                            "tabulated samples must span [0, {duration}], got [{a}, {b}]"
                        )));
                    }
                }
            }
            TrajectoryKind::Tortoise { radial, .. } => {
                if (radial.duration - duration).abs() > 1e-12 * duration {
                    return Err(Error::invalid("mapped trajectory must keep the radial duration"));
                }
            }
        }
        Ok(Self { kind, duration })
    }

    pub fn stationary(x1: f64, x2: f64, duration: f64) -> Result<Self> {
        Self::new(TrajectoryKind::Static { x1, x2 }, duration)
    }

    /// The driven-wall trajectory with `nu T = p pi`.
    pub fn oscillating_wall(r0: f64, l0: f64, amplitude: f64, nu: f64, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("number of half periods p must be at least 1"));
        }
        positive("nu", nu)?;
        Self::new(TrajectoryKind::OscillatingWall { r0, l0, amplitude, nu }, p as f64 * PI / nu)
    }

    pub fn rigid_translation(
        x1_start: f64,
        length: f64,
        shift: f64,
        wobble: f64,
        frequency: f64,
        duration: f64,
    ) -> Result<Self> {
        Self::new(TrajectoryKind::RigidTranslation { x1_start, length, shift, wobble, frequency }, duration)
    }

    /// Spline through samples `(t_k, x1_k, x2_k)`; times must start at 0 and
    /// increase strictly. The spline has zero slope at both ends.
    pub fn tabulated(times: &[f64], x1: &[f64], x2: &[f64]) -> Result<Self> {
        let inner = ClampedSpline::new(times.to_vec(), x1.to_vec())?;
        let outer = ClampedSpline::new(times.to_vec(), x2.to_vec())?;
        let duration = *times.last().expect("spline has samples");
        Self::new(TrajectoryKind::Tabulated { inner, outer }, duration)
    }

    /// Tabulates two closures on `samples` evenly spaced times.
    pub fn tabulated_fn<F, G>(x1: F, x2: G, duration: f64, samples: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        positive("duration", duration)?;
        if samples < 2 {
            return Err(Error::invalid("need at least two samples"));
        }
        let times: Vec<f64> = (0..samples).map(|k| duration * k as f64 / (samples - 1) as f64).collect();
        let a: Vec<f64> = times.iter().map(|&t| x1(t)).collect();
        let b: Vec<f64> = times.iter().map(|&t| x2(t)).collect();
        Self::tabulated(&times, &a, &b)
    }

    pub fn kind(&self) -> &TrajectoryKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            TrajectoryKind::Static { .. } => "static",
            TrajectoryKind::OscillatingWall { .. } => "oscillating-wall",
            TrajectoryKind::RigidTranslation { .. } => "rigid-translation",
            TrajectoryKind::Tabulated { .. } => "tabulated",
            TrajectoryKind::Tortoise { .. } => "tortoise",
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.duration;
        if !(t >= -slack && t <= self.duration + slack) {
            return Err(Error::invalid(format!("time {t} outside [0, {}]", self.duration)));
        }
        Ok(())
    }

    pub fn position(&self, boundary: Boundary, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.state(boundary, t).0)
    }

    pub fn velocity(&self, boundary: Boundary, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.state(boundary, t).1)
    }

    pub fn acceleration(&self, boundary: Boundary, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.state(boundary, t).2)
    }

    /// `x_2(t) - x_1(t)`.
    pub fn length(&self, t: f64) -> Result<f64> {
        Ok(self.position(Boundary::Outer, t)? - self.position(Boundary::Inner, t)?)
    }

    /// Position, velocity and acceleration without the time-range check.
    pub(crate) fn state(&self, boundary: Boundary, t: f64) -> (f64, f64, f64) {
        match &self.kind {
            TrajectoryKind::Static { x1, x2 } => match boundary {
                Boundary::Inner => (*x1, 0.0, 0.0),
                Boundary::Outer => (*x2, 0.0, 0.0),
            },
            TrajectoryKind::OscillatingWall { r0, l0, amplitude, nu } => match boundary {
                Boundary::Inner => (*r0, 0.0, 0.0),
                Boundary::Outer => {
                    let (s, c) = (nu * t).sin_cos();
                    (r0 + l0 + amplitude * s, amplitude * nu * c, -amplitude * nu * nu * s)
                }
            },
            TrajectoryKind::RigidTranslation { x1_start, length, shift, wobble, frequency } => {
                let (d, v, a) = rigid_displacement(*shift, *wobble, *frequency, self.duration, t);
                let base = match boundary {
                    Boundary::Inner => *x1_start,
                    Boundary::Outer => x1_start + length,
                };
                (base + d, v, a)
            }
            TrajectoryKind::Tabulated { inner, outer } => match boundary {
                Boundary::Inner => inner.eval(t),
                Boundary::Outer => outer.eval(t),
            },
            TrajectoryKind::Tortoise { radial, spacetime } => {
                let (r, dr, ddr) = radial.state(boundary, t);
                let r_s = spacetime.r_s();
                let f = 1.0 - r_s / r;
                let df = r_s / (r * r);
                let x = r + r_s * ((r - r_s) / r_s).ln();
                (x, dr / f, ddr / f - dr * dr * df / (f * f))
            }
        }
    }

    /// True when the given wall never moves, known from the parameters alone.
    pub fn boundary_is_fixed(&self, boundary: Boundary) -> bool {
        match &self.kind {
            TrajectoryKind::Static { .. } => true,
            TrajectoryKind::OscillatingWall { amplitude, .. } => boundary == Boundary::Inner || *amplitude == 0.0,
            TrajectoryKind::RigidTranslation { shift, wobble, .. } => *shift == 0.0 && *wobble == 0.0,
            TrajectoryKind::Tabulated { inner, outer } => {
                let s = if boundary == Boundary::Inner { inner } else { outer };
                s.y.iter().all(|&v| v == s.y[0])
            }
            TrajectoryKind::Tortoise { radial, .. } => radial.boundary_is_fixed(boundary),
        }
    }

    /// Angular frequency scale of the motion, used to size quadrature panels.
    pub fn characteristic_frequency(&self) -> f64 {
        match &self.kind {
            TrajectoryKind::Static { .. } => 0.0,
            TrajectoryKind::OscillatingWall { nu, .. } => *nu,
            TrajectoryKind::RigidTranslation { frequency, .. } => frequency.abs() + 2.0 * PI / self.duration,
            TrajectoryKind::Tabulated { inner, .. } => 2.0 * PI * (inner.len().min(64) as f64) / self.duration,
            TrajectoryKind::Tortoise { radial, .. } => radial.characteristic_frequency(),
        }
    }

    /// True when `x_2 - x_1` is constant, the case handled by the
    /// instantaneous-mode (scattering) method.
    pub fn is_rigid(&self) -> bool {
        match &self.kind {
            TrajectoryKind::Static { .. } | TrajectoryKind::RigidTranslation { .. } => true,
            TrajectoryKind::OscillatingWall { amplitude, .. } => *amplitude == 0.0,
            _ => {
                let l0 = self.state(Boundary::Outer, 0.0).0 - self.state(Boundary::Inner, 0.0).0;
                self.sample_times().all(|t| {
                    let (p1, v1, _) = self.state(Boundary::Inner, t);
                    let (p2, v2, _) = self.state(Boundary::Outer, t);
                    ((p2 - p1) - l0).abs() <= 1e-12 * l0.abs().max(1.0) && (v2 - v1).abs() <= 1e-12
                })
            }
        }
    }

    fn sample_times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..VALIDATION_SAMPLES).map(move |k| self.duration * k as f64 / (VALIDATION_SAMPLES - 1) as f64)
    }

    /// Smallest position of one wall over `[0, T]` (analytic where available).
    pub fn min_position(&self, boundary: Boundary) -> f64 {
        match (&self.kind, boundary) {
            (TrajectoryKind::Static { x1, .. }, Boundary::Inner) => *x1,
            (TrajectoryKind::Static { x2, .. }, Boundary::Outer) => *x2,
            (TrajectoryKind::OscillatingWall { r0, .. }, Boundary::Inner) => *r0,
            (TrajectoryKind::OscillatingWall { r0, l0, amplitude, nu }, Boundary::Outer) => {
                // the minimum of sin over [0, p pi] is -1 once p >= 2, else 0
                let reaches_trough = nu * self.duration >= 1.5 * PI - 1e-12;
                let low = if *amplitude >= 0.0 {
                    if reaches_trough {
                        -amplitude
                    } else {
                        0.0
                    }
                } else {
                    *amplitude
                };
                r0 + l0 + low
            }
            _ => self.sample_times().map(|t| self.state(boundary, t).0).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn validate(&self) -> TrajectoryReport {
        let mut max_speed = 0.0_f64;
        let mut min_length = f64::INFINITY;
        for t in self.sample_times() {
            let (p1, v1, _) = self.state(Boundary::Inner, t);
            let (p2, v2, _) = self.state(Boundary::Outer, t);
            max_speed = max_speed.max(v1.abs()).max(v2.abs());
            min_length = min_length.min(p2 - p1);
        }
        if let TrajectoryKind::OscillatingWall { r0, amplitude, nu, .. } = &self.kind {
            max_speed = max_speed.max(amplitude.abs() * nu);
            min_length = min_length.min(self.min_position(Boundary::Outer) - r0);
        }
        let endpoint_speed = [0.0, self.duration]
            .iter()
            .flat_map(|&t| [self.state(Boundary::Inner, t).1.abs(), self.state(Boundary::Outer, t).1.abs()])
            .fold(0.0, f64::max);
        let mut violations = Vec::new();
        if max_speed >= 1.0 {
            violations.push(TrajectoryViolation::Superluminal { max_speed });
        }
        if min_length <= 0.0 {
            violations.push(TrajectoryViolation::CavityCollapse { min_length });
        }
        TrajectoryReport { max_speed, min_length, endpoint_speed, violations }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryViolation {
    Superluminal { max_speed: f64 },
    CavityCollapse { min_length: f64 },
}

impl std::fmt::Display for TrajectoryViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrajectoryViolation::Superluminal { max_speed } => {
                write!(f, "superluminal boundary: max |dx/dt| = {max_speed} >= 1")
            }
            TrajectoryViolation::CavityCollapse { min_length } => {
                write!(f, "cavity collapses: min x2 - x1 = {min_length} <= 0")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryReport {
    pub max_speed: f64,
    pub min_length: f64,
    /// Largest wall speed at `t = 0` or `t = T`. Nonzero for the oscillating wall.
    pub endpoint_speed: f64,
    pub violations: Vec<TrajectoryViolation>,
}

impl TrajectoryReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn rigid_displacement(shift: f64, wobble: f64, frequency: f64, duration: f64, t: f64) -> (f64, f64, f64) {
    let u = t / duration;
    let step = shift * u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    let step_v = shift * 30.0 * u * u * (1.0 - u) * (1.0 - u) / duration;
    let step_a = shift * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (duration * duration);

    let k = PI / duration;
    let (sk, ck) = (k * t).sin_cos();
    let window = sk.powi(4);
    let window_v = 4.0 * k * sk.powi(3) * ck;
    let window_a = 4.0 * k * k * (3.0 * sk * sk * ck * ck - sk.powi(4));
    let (s, c) = (frequency * t).sin_cos();
    let osc = wobble * s * window;
    let osc_v = wobble * (frequency * c * window + s * window_v);
    let osc_a = wobble * (-frequency * frequency * s * window + 2.0 * frequency * c * window_v + s * window_a);
    (step + osc, step_v + osc_v, step_a + osc_a)
}

/// Cubic spline with zero first derivative at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
}

impl ClampedSpline {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n < 2 || y.len() != n {
            return Err(Error::invalid("spline needs at least two samples with matching lengths"));
        }
        if t[0] != 0.0 {
            return Err(Error::invalid(format!("tabulated times must start at 0, got {}", t[0])));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("tabulated times must be finite and strictly increasing"));
        }
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        // tridiagonal system for the second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * (y[1] - y[0]) / h[0];
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        sub[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = -6.0 * (y[n - 1] - y[n - 2]) / h[n - 2];
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - sup[i] * second[i + 1]) / diag[i];
        }
        Ok(Self { t, y, second })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().expect("non-empty"))
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Value, first and second derivative.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.t.len();
        let i = self.t.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let value = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        (value, slope, a * m0 + b * m1)
    }
}

/// The driven-wall experiment: inner wall fixed at `r0`, outer wall at
/// `r0 + l0 + amplitude sin(nu t)`, run for `p` half periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatingScenario {
    pub r0: f64,
    pub l0: f64,
    pub amplitude: f64,
    pub nu: f64,
    pub p: u32,
}

impl OscillatingScenario {
    pub fn new(r0: f64, l0: f64, amplitude: f64, nu: f64, p: u32) -> Result<Self> {
        finite("r0", r0)?;
        positive("l0", l0)?;
        finite("amplitude", amplitude)?;
        positive("nu", nu)?;
        if p == 0 {
            return Err(Error::invalid("p must be at least 1"));
        }
        if amplitude.abs() >= l0 {
            return Err(Error::invalid(format!(
                "epsilon = A / L0 = {} must be below 1",
                amplitude.abs() / l0
            )));
        }
        Ok(Self { r0, l0, amplitude, nu, p })
    }

    /// `epsilon = A / L0`.
    pub fn epsilon(&self) -> f64 {
        self.amplitude / self.l0
    }

    /// `T = p pi / nu`.
    pub fn duration(&self) -> f64 {
        self.p as f64 * PI / self.nu
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        Self::new(self.r0, self.l0, self.amplitude, nu, self.p)
    }

    /// Lowest-order mode frequency `w_m^(0) = f(r0) m pi / L0`.
    pub fn base_frequency(&self, st: &SchwarzschildSpacetime, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(Error::invalid("mode index starts at 1"));
        }
        Ok(st.lapse(self.r0)? * m as f64 * PI / self.l0)
    }

    /// The trajectory in the radial coordinate.
    pub fn radial_trajectory(&self) -> Result<Trajectory> {
        Trajectory::oscillating_wall(self.r0, self.l0, self.amplitude, self.nu, self.p)
    }

    /// The trajectory in the conformally flat (tortoise) coordinate.
    pub fn conformal_trajectory(&self, st: &SchwarzschildSpacetime) -> Result<Trajectory> {
        crate::spacetime::radial_to_conformal(st, &self.radial_trajectory()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn oscillating_wall_examples() {
        let tr = Trajectory::oscillating_wall(2.0, 1.0, 0.01, 3.0, 4).unwrap();
        let t_end = 4.0 * PI / 3.0;
        assert_eq!(tr.duration(), t_end);
        assert_eq!(tr.position(Boundary::Outer, 0.0).unwrap(), 3.0);
        assert_relative_eq!(tr.position(Boundary::Outer, t_end).unwrap(), 3.0, epsilon = 1e-15);
        assert_eq!(tr.velocity(Boundary::Inner, 0.7).unwrap(), 0.0);
        assert_relative_eq!(tr.velocity(Boundary::Outer, 0.0).unwrap(), 0.03);
        assert!(matches!(tr.position(Boundary::Outer, t_end * 1.01), Err(Error::InvalidArgument(_))));
        assert!(tr.velocity(Boundary::Outer, -0.1).is_err());
    }

    #[test]
    fn static_examples() {
        let tr = Trajectory::stationary(0.0, 1.0, 5.0).unwrap();
        for t in [0.0, 1.0, 5.0] {
            assert_eq!(tr.position(Boundary::Inner, t).unwrap(), 0.0);
            assert_eq!(tr.position(Boundary::Outer, t).unwrap(), 1.0);
            assert_eq!(tr.velocity(Boundary::Outer, t).unwrap(), 0.0);
        }
        assert!(tr.is_rigid());
    }

    #[test]
    fn validation_flags() {
        let ok = Trajectory::oscillating_wall(0.0, 1.0, 0.09, 10.0, 2).unwrap().validate();
        assert!(ok.is_valid());
        assert_relative_eq!(ok.max_speed, 0.9, epsilon = 1e-15);
        assert_relative_eq!(ok.endpoint_speed, 0.9, epsilon = 1e-15);

        let fast = Trajectory::oscillating_wall(0.0, 1.0, 0.15, 10.0, 2).unwrap().validate();
        assert!(fast.violations.iter().any(|v| matches!(v, TrajectoryViolation::Superluminal { .. })));

        let collapse = Trajectory::oscillating_wall(0.0, 1.0, 1.0, 0.1, 2).unwrap().validate();
        assert!(collapse.violations.iter().any(|v| matches!(v, TrajectoryViolation::CavityCollapse { .. })));
    }

    #[test]
    fn rigid_translation_has_quiet_ends() {
        let tr = Trajectory::rigid_translation(1.0, 2.0, 0.05, 0.01, 7.0, 3.0).unwrap();
        for t in [0.0, 3.0] {
            assert!(tr.velocity(Boundary::Inner, t).unwrap().abs() < 1e-15);
            assert!(tr.acceleration(Boundary::Outer, t).unwrap().abs() < 1e-12);
        }
        assert_relative_eq!(tr.position(Boundary::Inner, 3.0).unwrap(), 1.05, epsilon = 1e-14);
        assert_relative_eq!(tr.length(1.234).unwrap(), 2.0, epsilon = 1e-14);
        assert!(tr.is_rigid());
        assert!(tr.validate().endpoint_speed < 1e-15);
    }

    #[test]
    fn finite_differences_match_analytic_derivatives() {
        let st = SchwarzschildSpacetime::new(0.5).unwrap();
        let cases = vec![
            Trajectory::oscillating_wall(1.0, 1.0, 0.05, 2.3, 3).unwrap(),
            Trajectory::rigid_translation(0.0, 1.0, 0.2, 0.03, 5.0, 2.0).unwrap(),
            crate::spacetime::radial_to_conformal(&st, &Trajectory::oscillating_wall(1.0, 1.0, 0.05, 2.3, 3).unwrap())
                .unwrap(),
        ];
        let h = 1e-6;
        for tr in &cases {
            for k in 1..50 {
                let t = tr.duration() * k as f64 / 50.0;
                for b in [Boundary::Inner, Boundary::Outer] {
                    let fd = (tr.position(b, t + h).unwrap() - tr.position(b, t - h).unwrap()) / (2.0 * h);
                    let v = tr.velocity(b, t).unwrap();
                    assert!((fd - v).abs() < 1e-8, "{} velocity at {t}: {fd} vs {v}", tr.kind_name());
                    let fa = (tr.velocity(b, t + h).unwrap() - tr.velocity(b, t - h).unwrap()) / (2.0 * h);
                    let a = tr.acceleration(b, t).unwrap();
                    assert!((fa - a).abs() < 1e-7, "{} acceleration at {t}: {fa} vs {a}", tr.kind_name());
                }
            }
        }
    }

    #[test]
    fn spline_reproduces_smooth_data_and_clamps_ends() {
        let f = |t: f64| 1.0 + 0.1 * (PI * t).cos();
        let tr = Trajectory::tabulated_fn(|t| f(t) - 1.0, f, 1.0, 201).unwrap();
        assert!(tr.velocity(Boundary::Outer, 0.0).unwrap().abs() < 1e-14);
        assert!(tr.velocity(Boundary::Outer, 1.0).unwrap().abs() < 1e-14);
        for k in 0..=40 {
            let t = k as f64 / 40.0;
            assert!((tr.position(Boundary::Outer, t).unwrap() - f(t)).abs() < 1e-8);
            let v = -0.1 * PI * (PI * t).sin();
            assert!((tr.velocity(Boundary::Outer, t).unwrap() - v).abs() < 1e-5);
        }
        assert!(tr.is_rigid());
    }

    #[test]
    fn spline_rejects_bad_samples() {
        assert!(ClampedSpline::new(vec![0.0], vec![1.0]).is_err());
        assert!(ClampedSpline::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(ClampedSpline::new(vec![0.5, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn scenario_derived_quantities() {
        let s = OscillatingScenario::new(10.0, 1.0, 1e-3, PI, 4).unwrap();
        assert_eq!(s.epsilon(), 1e-3);
        assert_relative_eq!(s.duration(), 4.0);
        let st = SchwarzschildSpacetime::new(1.0).unwrap();
        assert_relative_eq!(s.base_frequency(&st, 2).unwrap(), 0.9 * 2.0 * PI);
        assert!(OscillatingScenario::new(0.0, 1.0, 1.0, 1.0, 1).is_err());
        assert!(OscillatingScenario::new(0.0, 1.0, 0.1, 1.0, 0).is_err());
    }
}
