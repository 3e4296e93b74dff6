// SPDX-License-Identifier: Apache-2.0

//! Bogoliubov transformations stored as their `(alpha, beta)` blocks.
//!
//! The full transformation is `S = [[alpha, beta], [beta*, alpha*]]`; the
//! conjugate row is implied. `S K S^dagger = K` with `K = diag(I, -I)` is
//! equivalent to `alpha alpha^dagger - beta beta^dagger = I` and
//! `alpha beta^T - beta alpha^T = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, max_abs, CMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    pub alpha: CMatrix,
    pub beta: CMatrix,
}

impl BogoliubovTransform {
    pub fn new(alpha: CMatrix, beta: CMatrix) -> Result<Self> {
        let n = alpha.nrows();
        if alpha.ncols() != n || beta.nrows() != n || beta.ncols() != n {
            return Err(Error::invalid(format!(
                "alpha is {}x{} and beta is {}x{}; both must be the same square size",
                alpha.nrows(),
                alpha.ncols(),
                beta.nrows(),
                beta.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::invalid("a transformation needs at least one mode"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self { alpha: CMatrix::identity(n_modes, n_modes), beta: CMatrix::zeros(n_modes, n_modes) }
    }

    pub fn n_modes(&self) -> usize {
        self.alpha.nrows()
    }

    /// Inverse transformation, blocks `(alpha^dagger, -beta^T)`.
    pub fn inverse(&self) -> Self {
        Self { alpha: self.alpha.adjoint(), beta: -self.beta.transpose() }
    }

    /// Bogoliubov coefficient `beta_mn` with 1-based mode labels.
    pub fn beta_at(&self, m: usize, n: usize) -> Complex64 {
        self.beta[(m - 1, n - 1)]
    }

    pub fn alpha_at(&self, m: usize, n: usize) -> Complex64 {
        self.alpha[(m - 1, n - 1)]
    }

    /// Entry of `beta` with the largest modulus, as `((m, n), value)`, 1-based.
    pub fn dominant_beta(&self, within: usize) -> ((usize, usize), Complex64) {
        let k = within.min(self.n_modes());
        let mut best = ((1, 1), self.beta[(0, 0)]);
        for i in 0..k {
            for j in 0..k {
                if self.beta[(i, j)].norm() > best.1.norm() {
                    best = ((i + 1, j + 1), self.beta[(i, j)]);
                }
            }
        }
        best
    }
}

/// `S = second * first`: `first` acts before `second`.
pub fn compose(second: &BogoliubovTransform, first: &BogoliubovTransform) -> Result<BogoliubovTransform> {
    if second.n_modes() != first.n_modes() {
        return Err(Error::invalid(format!(
            "cannot compose transformations on {} and {} modes",
            second.n_modes(),
            first.n_modes()
        )));
    }
    let alpha = &second.alpha * &first.alpha + &second.beta * first.beta.conjugate();
    let beta = &second.alpha * &first.beta + &second.beta * first.alpha.conjugate();
    Ok(BogoliubovTransform { alpha, beta })
}

/// Max-norm residuals of `alpha alpha^dagger - beta beta^dagger - I` and
/// `alpha beta^T - beta alpha^T`, restricted to the leading `interior` block.
///
/// Truncation spoils the identities near the top of the mode ladder, so only
/// an interior block is meaningful for truncated dynamics.
pub fn identity_residuals(s: &BogoliubovTransform, interior: usize) -> Result<(f64, f64)> {
    let n = s.n_modes();
    if interior == 0 || interior > n {
        return Err(Error::invalid(format!("interior block size {interior} must lie in 1..={n}")));
    }
    let first = &s.alpha * s.alpha.adjoint() - &s.beta * s.beta.adjoint() - CMatrix::identity(n, n);
    let second = &s.alpha * s.beta.transpose() - &s.beta * s.alpha.transpose();
    let r1 = max_abs(&first.view((0, 0), (interior, interior)).into_owned());
    let r2 = max_abs(&second.view((0, 0), (interior, interior)).into_owned());
    Ok((r1, r2))
}

/// Positive mode frequencies `w_1 < w_2 < ... < w_N`; the full frequency
/// matrix is `diag(w, -w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    omegas: Vec<f64>,
}

impl FrequencyMatrix {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::invalid("frequency list is empty"));
        }
        if omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("frequencies must be finite and strictly positive"));
        }
        if omegas.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::invalid("frequencies must be strictly increasing"));
        }
        Ok(Self { omegas })
    }

    pub fn from_config(config: &crate::modes::CavityConfig) -> Self {
        Self { omegas: config.frequencies() }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// Free evolution for time `t`: `alpha = diag(e^{i w_m t})`, `beta = 0`.
pub fn phase_evolution(omegas: &FrequencyMatrix, t: f64) -> BogoliubovTransform {
    let n = omegas.len();
    let alpha = DMatrix::from_fn(n, n, |i, j| if i == j { cis(omegas.omegas[i] * t) } else { Complex64::new(0.0, 0.0) });
    BogoliubovTransform { alpha, beta: CMatrix::zeros(n, n) }
}

/// Mean particle number per mode after the transformation acts on the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpectrum {
    pub mean_particles: Vec<f64>,
}

impl ParticleSpectrum {
    pub fn total(&self) -> f64 {
        self.mean_particles.iter().sum()
    }

    /// CSV with columns `mode,mean_particles`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,mean_particles\n");
        for (k, n) in self.mean_particles.iter().enumerate() {
            out.push_str(&format!("{},{:.17e}\n", k + 1, n));
        }
        out
    }
}

/// `N_m = sum_n |beta_nm|^2` (sum over the first index).
pub fn vacuum_particle_numbers(s: &BogoliubovTransform) -> ParticleSpectrum {
    let n = s.n_modes();
    let mean_particles = (0..n).map(|m| (0..n).map(|k| s.beta[(k, m)].norm_sqr()).sum()).collect();
    ParticleSpectrum { mean_particles }
}

#[derive(Serialize, Deserialize)]
struct TransformRecord {
    n_modes: usize,
    alpha_re: Vec<f64>,
    alpha_im: Vec<f64>,
    beta_re: Vec<f64>,
    beta_im: Vec<f64>,
}

fn row_major(m: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.nrows();
    let mut re = Vec::with_capacity(n * n);
    let mut im = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..m.ncols() {
            re.push(m[(i, j)].re);
            im.push(m[(i, j)].im);
        }
    }
    (re, im)
}

fn from_row_major(n: usize, re: &[f64], im: &[f64], name: &str) -> std::result::Result<CMatrix, String> {
    if re.len() != n * n || im.len() != n * n {
        return Err(format!("{name} arrays must hold n_modes^2 = {} entries", n * n));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(re[i * n + j], im[i * n + j])))
}

impl Serialize for BogoliubovTransform {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (alpha_re, alpha_im) = row_major(&self.alpha);
        let (beta_re, beta_im) = row_major(&self.beta);
        TransformRecord { n_modes: self.n_modes(), alpha_re, alpha_im, beta_re, beta_im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BogoliubovTransform {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = TransformRecord::deserialize(deserializer)?;
        let alpha = from_row_major(rec.n_modes, &rec.alpha_re, &rec.alpha_im, "alpha").map_err(serde::de::Error::custom)?;
        let beta = from_row_major(rec.n_modes, &rec.beta_re, &rec.beta_im, "beta").map_err(serde::de::Error::custom)?;
        BogoliubovTransform::new(alpha, beta).map_err(serde::de::Error::custom)
    }
}
