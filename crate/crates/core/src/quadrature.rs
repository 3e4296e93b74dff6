// SPDX-License-Identifier: Apache-2.0

//! Quadrature rules: composite Gauss-Legendre for smooth spatial integrals and
//! a globally adaptive Gauss-Kronrod (7/15) scheme for oscillatory time
//! integrals.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed composite Gauss-Legendre rule: `panels` equal panels of `order` nodes.
#[derive(Debug, Clone)]
pub struct CompositeGaussLegendre {
    rule: GaussLegendre,
    panels: usize,
}

impl CompositeGaussLegendre {
    pub fn new(order: usize, panels: usize) -> Self {
        assert!(panels >= 1);
        Self { rule: GaussLegendre::new(order), panels }
    }

    /// Rule resolving products of modes up to `max_index` with at least ten
    /// nodes per wavelength of the fastest integrand.
    pub fn for_max_mode(max_index: usize) -> Self {
        Self::new(10, 2 * max_index.max(1) + 4)
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    /// Quadrature points and weights mapped onto `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let h = (b - a) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.rule.order());
        for k in 0..self.panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (x, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }

    pub fn integrate<F>(&self, a: f64, b: f64, f: F) -> Complex64
    where
        F: Fn(f64) -> Complex64,
    {
        self.points(a, b).into_iter().map(|(x, w)| f(x) * w).sum()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel; the error is |K15 - G7|.
fn kronrod_15<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += sum * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss-Kronrod integration of complex integrands.
///
/// The interval is first cut into the requested number of equal panels (one
/// per period of the fastest phase, see [`oscillation_panels`]), then the
/// panel with the largest error estimate is bisected until the summed
/// estimate meets the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for AdaptiveQuadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_subdivisions: 200_000 }
    }
}

impl AdaptiveQuadrature {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, ..Self::default() }
    }

    pub fn integrate<F>(&self, f: F, a: f64, b: f64, initial_panels: usize) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> Complex64,
    {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::invalid(format!("non-finite integration bounds [{a}, {b}]")));
        }
        if a == b {
            return Ok(QuadratureResult { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 });
        }
        let panels = initial_panels.max(1);
        let h = (b - a) / panels as f64;
        let mut segments: Vec<(f64, f64, Complex64, f64)> = (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                let hi = if k + 1 == panels { b } else { lo + h };
                let (v, e) = kronrod_15(&f, lo, hi);
                (lo, hi, v, e)
            })
            .collect();
        let mut evaluations = 15 * panels;

        loop {
            let value: Complex64 = segments.iter().map(|s| s.2).sum();
            let error: f64 = segments.iter().map(|s| s.3).sum();
            let target = self.abs_tol.max(self.rel_tol * value.norm());
            if error <= target {
                return Ok(QuadratureResult { value, error, evaluations });
            }
            if segments.len() >= self.max_subdivisions {
                return Err(Error::NumericalFailure(format!(
                    "adaptive quadrature on [{a}, {b}] did not reach tolerance {target:e} \
                     (estimate {error:e}) within {} subdivisions",
                    self.max_subdivisions
                )));
            }
            let (worst, _) = segments
                .iter()
                .enumerate()
                .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
                .expect("at least one segment");
            let (lo, hi, _, _) = segments[worst];
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                return Err(Error::NumericalFailure(format!(
                    "adaptive quadrature on [{a}, {b}]: interval [{lo}, {hi}] cannot be bisected further"
                )));
            }
            let (vl, el) = kronrod_15(&f, lo, mid);
            let (vr, er) = kronrod_15(&f, mid, hi);
            evaluations += 30;
            segments[worst] = (lo, mid, vl, el);
            segments.push((mid, hi, vr, er));
        }
    }

    pub fn integrate_real<F>(&self, f: F, a: f64, b: f64, initial_panels: usize) -> Result<(f64, f64)>
    where
        F: Fn(f64) -> f64,
    {
        let r = self.integrate(|t| Complex64::new(f(t), 0.0), a, b, initial_panels)?;
        Ok((r.value.re, r.error))
    }
}

/// Number of equal panels on `[a, b]` so that each spans at most one period of
/// a phase oscillating at angular frequency `fastest`.
pub fn oscillation_panels(a: f64, b: f64, fastest: f64) -> usize {
    let cycles = (b - a).abs() * fastest.abs() / (2.0 * PI);
    (cycles.ceil() as usize).clamp(1, 1_000_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(6);
        let weight_sum: f64 = rule.weights().iter().sum();
        assert!((weight_sum - 2.0).abs() < 1e-14);
        // degree 11 is the highest exact degree for 6 nodes
        let integral: f64 = rule.nodes().iter().zip(rule.weights()).map(|(x, w)| w * x.powi(10)).sum();
        assert!((integral - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_odd_order_has_center_node() {
        let rule = GaussLegendre::new(5);
        assert_eq!(rule.nodes()[2], 0.0);
        assert!((rule.weights()[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_handles_oscillation() {
        let rule = CompositeGaussLegendre::for_max_mode(20);
        let v = rule.integrate(0.0, 1.0, |x| Complex64::new((40.0 * PI * x).sin().powi(2), 0.0));
        assert!((v.re - 0.5).abs() < 1e-13);
    }

    #[test]
    fn adaptive_oscillatory_integral_matches_closed_form() {
        let q = AdaptiveQuadrature::with_tolerance(1e-13);
        let k = 37.3;
        let t_end = 5.0;
        let r = q
            .integrate(|t| Complex64::from_polar(1.0, -k * t) * t.cos(), 0.0, t_end, oscillation_panels(0.0, t_end, k + 1.0))
            .unwrap();
        // int_0^T e^{-ikt} cos t dt = 1/2 sum_{s=+-1} (1 - e^{-i(k - s)T}) / (i(k - s))
        let exact: Complex64 = [1.0, -1.0]
            .iter()
            .map(|s: &f64| {
                let w = k - s;
                (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * t_end)) / Complex64::new(0.0, w)
            })
            .sum::<Complex64>()
            * 0.5;
        assert!((r.value - exact).norm() < 1e-12, "{} vs {}", r.value, exact);
        assert!(r.error < 1e-12);
    }

    #[test]
    fn adaptive_refines_a_kink() {
        let q = AdaptiveQuadrature::with_tolerance(1e-10);
        let (v, _) = q.integrate_real(|t: f64| (t - 0.3).abs(), 0.0, 1.0, 1).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-9);
    }

    #[test]
    fn subdivision_budget_is_reported() {
        let q = AdaptiveQuadrature { abs_tol: 1e-15, rel_tol: 0.0, max_subdivisions: 4 };
        let err = q.integrate_real(|t: f64| 1.0 / t.sqrt(), 1e-300, 1.0, 1).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure(_)));
    }
}
