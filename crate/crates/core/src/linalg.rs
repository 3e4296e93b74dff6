// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn is_diagonal(m: &CMatrix) -> bool {
    m.iter()
        .enumerate()
        .all(|(k, z)| (k % m.nrows() == k / m.nrows()) || *z == Complex64::new(0.0, 0.0))
}

/// Matrix exponential of a square complex matrix.
///
/// Diagonal inputs (motionless walls) are exponentiated entrywise, which keeps
/// pure phases exact; everything else goes to nalgebra's scaling and squaring.
///
/// # Panics
/// Panics if `a` is not square.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if is_diagonal(a) {
        return CMatrix::from_fn(n, n, |i, j| if i == j { a[(i, i)].exp() } else { c(0.0, 0.0) });
    }
    a.clone().exp()
}
