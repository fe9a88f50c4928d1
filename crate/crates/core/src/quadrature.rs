//! Composite Gauss–Legendre quadrature on uniform panels.
//!
//! The integrands here are products of trigonometric eigenfunctions, so the
//! panel width is chosen from the highest wavenumber in the integrand and the
//! panel count is doubled until two successive estimates agree.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
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

    /// Single application of the rule on [lo, hi].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Visits every (point, weight) pair of the composite rule with `panels`
    /// equal panels on [lo, hi].
    pub fn for_each_point<F: FnMut(f64, f64)>(&self, lo: f64, hi: f64, panels: usize, mut f: F) {
        let width = (hi - lo) / panels as f64;
        let half = 0.5 * width;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                f(mid + half * x, w * half);
            }
        }
    }
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of a converged panel integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    /// |difference| between the last two panel counts.
    pub error: f64,
    /// Integral of |f|, the natural scale for relative tolerances.
    pub magnitude: f64,
    /// Total panels used in the accepted estimate.
    pub panels: usize,
}

/// Doubling panel integrator over a union of segments.
#[derive(Debug, Clone)]
pub struct PanelQuadrature {
    rule: GaussLegendre,
    pub rel_tol: f64,
    /// Absolute floor for integrands that vanish up to roundoff.
    pub abs_tol: f64,
    pub max_doublings: usize,
}

impl Default for PanelQuadrature {
    fn default() -> Self {
        Self::new(16, 1e-10)
    }
}

impl PanelQuadrature {
    pub fn new(order: usize, rel_tol: f64) -> Self {
        Self { rule: GaussLegendre::new(order), rel_tol, abs_tol: 1e-14, max_doublings: 8 }
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    /// Integrates `f` over the given segments. Each segment starts with
    /// enough panels that one panel spans at most one period of
    /// `wavenumber`; the count doubles until successive estimates agree to
    /// `rel_tol` relative to the integral of |f|, or to `abs_tol` absolutely.
    ///
    /// On failure returns the last error estimate.
    pub fn integrate<F>(&self, segments: &[(f64, f64)], wavenumber: f64, mut f: F) -> Result<Estimate, f64>
    where
        F: FnMut(f64) -> Complex64,
    {
        let base: Vec<usize> = segments
            .iter()
            .map(|&(lo, hi)| {
                let periods = (hi - lo) * wavenumber.abs() / (2.0 * PI);
                (periods.ceil() as usize).max(1)
            })
            .collect();

        let mut eval = |scale: usize| {
            let mut value = Complex64::new(0.0, 0.0);
            let mut magnitude = 0.0;
            let mut panels = 0;
            for (&(lo, hi), &p) in segments.iter().zip(&base) {
                let p = p * scale;
                panels += p;
                self.rule.for_each_point(lo, hi, p, |x, w| {
                    let v = f(x);
                    value += v * w;
                    magnitude += v.norm() * w;
                });
            }
            (value, magnitude, panels)
        };

        let (mut prev, _, _) = eval(1);
        let mut err = f64::INFINITY;
        let mut scale = 1;
        for _ in 0..self.max_doublings {
            scale *= 2;
            let (value, magnitude, panels) = eval(scale);
            err = (value - prev).norm();
            if err <= self.rel_tol * magnitude || err <= self.abs_tol {
                return Ok(Estimate { value, error: err, magnitude, panels });
            }
            prev = value;
        }
        Err(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        let rule = GaussLegendre::new(16);
        // Exact through degree 31.
        let got = rule.integrate(-1.0, 1.0, |x| x.powi(30));
        assert!((got - 2.0 / 31.0).abs() < 1e-15);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let rule = GaussLegendre::new(7);
        let xs = rule.nodes();
        assert!(xs.windows(2).all(|p| p[0] < p[1]));
        assert!(xs[3].abs() < 1e-15);
        for i in 0..7 {
            assert!((xs[i] + xs[6 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn oscillatory_integral_converges() {
        let q = PanelQuadrature::default();
        let k = 157.3;
        let est = q.integrate(&[(0.0, 2.0)], k, |x| Complex64::new((k * x).cos(), 0.0)).unwrap();
        let exact = (2.0 * k).sin() / k;
        assert!((est.value.re - exact).abs() < 1e-12);
    }

    #[test]
    fn segments_handle_discontinuities() {
        let q = PanelQuadrature::default();
        let step = |x: f64| Complex64::new(if x.abs() < 0.5 { -1.0 } else { 0.0 }, 0.0);
        let est = q
            .integrate(&[(-1.0, -0.5), (-0.5, 0.5), (0.5, 1.0)], 1.0, step)
            .unwrap();
        assert!((est.value.re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let q = PanelQuadrature::default();
        let est = q.integrate(&[(-1.0, 1.0)], 10.0, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(est.value, Complex64::new(0.0, 0.0));
    }
}
