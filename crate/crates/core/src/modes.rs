// SPDX-License-Identifier: Apache-2.0

//! Stationary mode basis of the cavity in conformally flat coordinates.
//!
//! Modes are `phi_m(t, x) = N_m e^{-i w_m t} sin(w_m (x - x1))` with
//! `w_m = m pi / (x2 - x1)` and `N_m = 1 / sqrt(m pi)`, orthonormal under the
//! Klein-Gordon inner product. Units have `c = 1`.
//!
//! The coupling matrices `A^(j)`, `B^(j)` returned by [`coupling_matrices`] are
//! expressed in the signed basis `(-1)^m phi_m`, i.e. modes anchored at the
//! outer wall, `sin(w_m (x2 - x))` up to a global sign. That choice fixes the
//! phase of every Bogoliubov coefficient computed in this crate; moduli and
//! particle numbers do not depend on it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::quadrature::CompositeGaussLegendre;

/// Boundary positions in the conformal coordinate plus the mode truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    x1: f64,
    x2: f64,
    n_modes: usize,
}

impl CavityConfig {
    pub fn new(x1: f64, x2: f64, n_modes: usize) -> Result<Self> {
        if !(x1.is_finite() && x2.is_finite()) {
            return Err(Error::invalid(format!("non-finite cavity boundaries x1 = {x1}, x2 = {x2}")));
        }
        if x2 <= x1 {
            return Err(Error::invalid(format!("degenerate cavity: x2 = {x2} must exceed x1 = {x1}")));
        }
        if n_modes == 0 {
            return Err(Error::invalid("mode truncation must be at least 1"));
        }
        Ok(Self { x1, x2, n_modes })
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn length(&self) -> f64 {
        self.x2 - self.x1
    }

    /// Same boundaries with a different truncation.
    pub fn with_modes(&self, n_modes: usize) -> Result<Self> {
        Self::new(self.x1, self.x2, n_modes)
    }

    /// Same inner wall and mode count, outer wall at `x1 + length`.
    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.x1, self.x1 + length, self.n_modes)
    }

    /// `w_1 .. w_N`.
    pub fn frequencies(&self) -> Vec<f64> {
        (1..=self.n_modes).map(|m| m as f64 * PI / self.length()).collect()
    }

    pub fn mode(&self, m: usize) -> Result<ModeFunction> {
        let frequency = mode_frequency(self, m)?;
        Ok(ModeFunction { index: m, frequency, normalization: 1.0 / (m as f64 * PI).sqrt(), x1: self.x1, x2: self.x2 })
    }
}

/// `w_m = m pi / (x2 - x1)`.
pub fn mode_frequency(config: &CavityConfig, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("mode index starts at 1"));
    }
    if config.x2 <= config.x1 {
        return Err(Error::invalid("degenerate cavity"));
    }
    Ok(m as f64 * PI / config.length())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFunction {
    pub index: usize,
    pub frequency: f64,
    pub normalization: f64,
    x1: f64,
    x2: f64,
}

impl ModeFunction {
    pub fn value(&self, t: f64, x: f64) -> Complex64 {
        Complex64::from_polar(self.normalization, -self.frequency * t) * (self.frequency * (x - self.x1)).sin()
    }

    pub fn time_derivative(&self, t: f64, x: f64) -> Complex64 {
        Complex64::new(0.0, -self.frequency) * self.value(t, x)
    }

    /// The mode restricted to the time slice `t`, as (value, time derivative) samples.
    pub fn slice(&self, t: f64) -> FieldSlice<impl Fn(f64) -> (Complex64, Complex64) + '_> {
        FieldSlice::new(self.x1, self.x2, move |x| (self.value(t, x), self.time_derivative(t, x)))
    }
}

/// A solution on one time slice: spatial domain plus a sampler returning the
/// field value and its time derivative at `x`.
pub struct FieldSlice<F> {
    pub x1: f64,
    pub x2: f64,
    sampler: F,
}

impl<F> FieldSlice<F>
where
    F: Fn(f64) -> (Complex64, Complex64),
{
    pub fn new(x1: f64, x2: f64, sampler: F) -> Self {
        Self { x1, x2, sampler }
    }

    pub fn sample(&self, x: f64) -> (Complex64, Complex64) {
        (self.sampler)(x)
    }

    pub fn conjugate(self) -> FieldSlice<impl Fn(f64) -> (Complex64, Complex64)> {
        let sampler = self.sampler;
        FieldSlice::new(self.x1, self.x2, move |x| {
            let (v, d) = sampler(x);
            (v.conj(), d.conj())
        })
    }
}

/// Klein-Gordon inner product `(f, g) = -i int (f dg*/dt - g* df/dt) dx`.
pub fn inner_product<F, G>(f: &FieldSlice<F>, g: &FieldSlice<G>, quadrature: &CompositeGaussLegendre) -> Result<Complex64>
where
    F: Fn(f64) -> (Complex64, Complex64),
    G: Fn(f64) -> (Complex64, Complex64),
{
    let scale = f.x1.abs().max(f.x2.abs()).max(1.0);
    if (f.x1 - g.x1).abs() > 1e-12 * scale || (f.x2 - g.x2).abs() > 1e-12 * scale {
        return Err(Error::invalid(format!(
            "inner product domains differ: [{}, {}] vs [{}, {}]",
            f.x1, f.x2, g.x1, g.x2
        )));
    }
    let integral = quadrature.integrate(f.x1, f.x2, |x| {
        let (fv, fd) = f.sample(x);
        let (gv, gd) = g.sample(x);
        fv * gd.conj() - gv.conj() * fd
    });
    Ok(Complex64::new(0.0, -1.0) * integral)
}

/// Closed-form displacement couplings at the reference geometry, plus the
/// `g_mn` overlaps of the instantaneous-mode method. All matrices are N x N,
/// indexed from mode 1 at position 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub a1: RMatrix,
    pub a2: RMatrix,
    pub b1: RMatrix,
    pub b2: RMatrix,
    pub g: RMatrix,
}

impl CouplingMatrices {
    /// `A^(1) + A^(2)`, the mixing generator of a rigid translation.
    pub fn total_a(&self) -> RMatrix {
        &self.a1 + &self.a2
    }

    pub fn total_b(&self) -> RMatrix {
        &self.b1 + &self.b2
    }

    pub fn n_modes(&self) -> usize {
        self.a1.nrows()
    }
}

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `g_mn = sqrt(mn) (1 - (-1)^{m+n}) / ((m+n)(m-n) pi)`; exactly zero for even `m + n`.
pub fn g_overlap(m: usize, n: usize) -> f64 {
    if (m + n) % 2 == 0 {
        return 0.0;
    }
    let (mf, nf) = (m as f64, n as f64);
    (mf * nf).sqrt() * 2.0 / ((mf + nf) * (mf - nf) * PI)
}

pub fn coupling_matrices(config: &CavityConfig) -> CouplingMatrices {
    let n = config.n_modes();
    let l0 = config.length();
    let w = config.frequencies();
    let mut a1 = RMatrix::zeros(n, n);
    let mut a2 = RMatrix::zeros(n, n);
    let mut b1 = RMatrix::zeros(n, n);
    let mut b2 = RMatrix::zeros(n, n);
    let mut g = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (m, k) = (i + 1, j + 1);
            let root = (w[i] * w[j]).sqrt();
            let sign = parity(m + k);
            if i != j {
                let diff = l0 * (w[i] - w[j]);
                a1[(i, j)] = sign * root / diff;
                a2[(i, j)] = -root / diff;
            }
            let sum = l0 * (w[i] + w[j]);
            b1[(i, j)] = -sign * root / sum;
            b2[(i, j)] = root / sum;
            g[(i, j)] = g_overlap(m, k);
        }
    }
    CouplingMatrices { a1, a2, b1, b2, g }
}

/// Worst closed-form vs quadrature discrepancy for each coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingResidualReport {
    pub tolerance: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    /// `(matrix, m, n, residual)` for every entry above tolerance, 1-based indices.
    pub flagged: Vec<(&'static str, usize, usize, f64)>,
}

impl CouplingResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.a1.max(self.a2).max(self.b1).max(self.b2)
    }

    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Recomputes `A^(j)_mn = (d phi_m / d x_j, phi_n)` and
/// `B^(j)_mn = -(d phi_m / d x_j, phi_n^*)` by Gauss-Legendre quadrature, with
/// the boundary derivative taken by a fourth-order central difference, and
/// compares against [`coupling_matrices`].
pub fn verify_coupling_against_quadrature(config: &CavityConfig, tol: f64) -> Result<CouplingResidualReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let n = config.n_modes();
    let closed = coupling_matrices(config);
    let quad = CompositeGaussLegendre::for_max_mode(n + 2);
    let points = quad.points(config.x1(), config.x2());
    let h = 1e-3 * config.length();

    // Signed-basis mode at t = 0 for arbitrary boundaries: (value, d/dt).
    let signed_mode = |m: usize, x1: f64, x2: f64, x: f64| -> (Complex64, Complex64) {
        let w = m as f64 * PI / (x2 - x1);
        let v = parity(m) * (w * (x - x1)).sin() / (m as f64 * PI).sqrt();
        (Complex64::new(v, 0.0), Complex64::new(0.0, -w * v))
    };
    let boundary_derivative = |m: usize, boundary: usize, x: f64| -> (Complex64, Complex64) {
        let eval = |d: f64| {
            if boundary == 1 {
                signed_mode(m, config.x1() + d, config.x2(), x)
            } else {
                signed_mode(m, config.x1(), config.x2() + d, x)
            }
        };
        let (p2, p1, m1, m2) = (eval(2.0 * h), eval(h), eval(-h), eval(-2.0 * h));
        let stencil = |a: Complex64, b: Complex64, c: Complex64, d: Complex64| (-a + b * 8.0 - c * 8.0 + d) / (12.0 * h);
        (stencil(p2.0, p1.0, m1.0, m2.0), stencil(p2.1, p1.1, m1.1, m2.1))
    };
    let kg = |f: &dyn Fn(f64) -> (Complex64, Complex64), g: &dyn Fn(f64) -> (Complex64, Complex64)| -> Complex64 {
        let integral: Complex64 = points
            .iter()
            .map(|&(x, w)| {
                let (fv, fd) = f(x);
                let (gv, gd) = g(x);
                (fv * gd.conj() - gv.conj() * fd) * w
            })
            .sum();
        Complex64::new(0.0, -1.0) * integral
    };

    let names = ["A1", "B1", "A2", "B2"];
    let mut worst = [0.0_f64; 4];
    let mut flagged = Vec::new();
    for boundary in [1usize, 2] {
        let (a_closed, b_closed) = if boundary == 1 { (&closed.a1, &closed.b1) } else { (&closed.a2, &closed.b2) };
        let slot = 2 * (boundary - 1);
        for i in 0..n {
            for j in 0..n {
                let (m, k) = (i + 1, j + 1);
                let dphi = |x: f64| boundary_derivative(m, boundary, x);
                let phi = |x: f64| signed_mode(k, config.x1(), config.x2(), x);
                let phi_conj = |x: f64| {
                    let (v, d) = signed_mode(k, config.x1(), config.x2(), x);
                    (v.conj(), d.conj())
                };
                let a_num = kg(&dphi, &phi);
                let b_num = -kg(&dphi, &phi_conj);
                let residuals = [
                    (a_num - Complex64::new(a_closed[(i, j)], 0.0)).norm(),
                    (b_num - Complex64::new(b_closed[(i, j)], 0.0)).norm(),
                ];
                for (offset, r) in residuals.into_iter().enumerate() {
                    worst[slot + offset] = worst[slot + offset].max(r);
                    if r > tol {
                        flagged.push((names[slot + offset], m, k, r));
                    }
                }
            }
        }
    }
    let report =
        CouplingResidualReport { tolerance: tol, a1: worst[0], b1: worst[1], a2: worst[2], b2: worst[3], flagged };
    Ok(report)
}
