//! Eigenbasis of the free confined Dirac Hamiltonian
//! `H0 = -i sigma_y d/dy + sigma_x m` on `|y| < a`.
//!
//! Walls follow the 1+1D bag condition, which in this representation reads
//! `upper(-a) = 0` and `lower(a) = 0`. With `s = y + a` every mode has the
//! form
//!
//! ```text
//! upper = A sin(k s)
//! lower = A (k cos(k s) + m sin(k s)) / eps,    eps = ±sqrt(k² + m²)
//! ```
//!
//! and the right wall fixes `k` through `k cos(2ak) + m sin(2ak) = 0`.
//! For `m = 0` this gives `k_j = (2j - 1) pi / (4a)` exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, PanelQuadrature};
use crate::roots;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Box half-width and fermion mass, in units with hbar = c = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxParams {
    pub a: f64,
    pub m: f64,
}

impl Default for BoxParams {
    fn default() -> Self {
        Self { a: 1.0, m: 0.0 }
    }
}

impl BoxParams {
    pub fn new(a: f64, m: f64) -> Result<Self> {
        let p = Self { a, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("box half-width must be positive, got {}", self.a)));
        }
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("mass must be non-negative, got {}", self.m)));
        }
        Ok(())
    }

    /// Gap below which two levels count as degenerate.
    pub fn degeneracy_threshold(&self) -> f64 {
        1e-9 * (1.0 / self.a).max(self.m)
    }

    /// Integration interval.
    pub fn interval(&self) -> (f64, f64) {
        (-self.a, self.a)
    }
}

/// Two-component value of a spinor field at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor {
    pub upper: Complex64,
    pub lower: Complex64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor { upper: ZERO, lower: ZERO };

    pub fn new(upper: Complex64, lower: Complex64) -> Self {
        Self { upper, lower }
    }

    pub fn real(upper: f64, lower: f64) -> Self {
        Self { upper: Complex64::new(upper, 0.0), lower: Complex64::new(lower, 0.0) }
    }

    /// `self† other`
    pub fn dot(&self, other: &Spinor) -> Complex64 {
        self.upper.conj() * other.upper + self.lower.conj() * other.lower
    }

    pub fn norm_sqr(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn sigma_x(&self) -> Spinor {
        Spinor { upper: self.lower, lower: self.upper }
    }

    pub fn sigma_y(&self) -> Spinor {
        Spinor { upper: -I * self.lower, lower: I * self.upper }
    }

    pub fn scale(&self, c: Complex64) -> Spinor {
        Spinor { upper: self.upper * c, lower: self.lower * c }
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, o: Spinor) -> Spinor {
        Spinor { upper: self.upper + o.upper, lower: self.lower + o.lower }
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, o: Spinor) -> Spinor {
        Spinor { upper: self.upper - o.upper, lower: self.lower - o.lower }
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, c: f64) -> Spinor {
        Spinor { upper: self.upper * c, lower: self.lower * c }
    }
}

impl Mul<Complex64> for Spinor {
    type Output = Spinor;
    fn mul(self, c: Complex64) -> Spinor {
        self.scale(c)
    }
}

/// Applies `H0 = -i sigma_y d/dy + sigma_x m` given a spinor and its
/// derivative at the same point.
pub fn apply_h0(mass: f64, psi: Spinor, dpsi: Spinor) -> Spinor {
    // -i sigma_y = [[0, -1], [1, 0]]
    Spinor { upper: -dpsi.lower + psi.lower * mass, lower: dpsi.upper + psi.upper * mass }
}

/// One eigenpair of the free Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub index: i32,
    pub energy: f64,
    /// Positive root of the dispersion relation.
    pub momentum: f64,
    amplitude: f64,
    mass: f64,
    a: f64,
}

impl Mode {
    fn new(index: i32, momentum: f64, params: &BoxParams) -> Self {
        let k = momentum;
        let m = params.m;
        let e_abs = (k * k + m * m).sqrt();
        let energy = if index > 0 { e_abs } else { -e_abs };
        let len = 2.0 * params.a;
        let int_ss = 0.5 * len - (2.0 * k * len).sin() / (4.0 * k);
        let int_cc = 0.5 * len + (2.0 * k * len).sin() / (4.0 * k);
        let int_sc = (k * len).sin().powi(2) / (2.0 * k);
        let norm_sqr = int_ss + (k * k * int_cc + 2.0 * k * m * int_sc + m * m * int_ss) / (e_abs * e_abs);
        Mode { index, energy, momentum, amplitude: 1.0 / norm_sqr.sqrt(), mass: m, a: params.a }
    }

    /// Eigenfunction value at `y`.
    pub fn eval(&self, y: f64) -> Spinor {
        let s = y + self.a;
        let (sin, cos) = (self.momentum * s).sin_cos();
        let upper = self.amplitude * sin;
        let lower = self.amplitude * (self.momentum * cos + self.mass * sin) / self.energy;
        Spinor::real(upper, lower)
    }

    /// Analytic derivative of the eigenfunction at `y`.
    pub fn derivative(&self, y: f64) -> Spinor {
        let k = self.momentum;
        let s = y + self.a;
        let (sin, cos) = (k * s).sin_cos();
        let upper = self.amplitude * k * cos;
        let lower = self.amplitude * (-k * k * sin + self.mass * k * cos) / self.energy;
        Spinor::real(upper, lower)
    }

    /// Pointwise `|H0 phi - eps phi|`.
    pub fn residual_at(&self, y: f64) -> f64 {
        let h = apply_h0(self.mass, self.eval(y), self.derivative(y));
        (h - self.eval(y) * self.energy).norm()
    }
}

/// Modes `-n_max..=-1` and `1..=n_max` of the confined free Hamiltonian.
#[derive(Debug, Clone)]
pub struct Basis {
    params: BoxParams,
    // positive[j] holds index j + 1, negative[j] holds index -(j + 1)
    positive: Vec<Mode>,
    negative: Vec<Mode>,
}

/// Left side of the dispersion relation `k cos(2ak) + m sin(2ak) = 0`.
pub fn dispersion(params: &BoxParams, k: f64) -> f64 {
    let x = 2.0 * params.a * k;
    k * x.cos() + params.m * x.sin()
}

/// First `count` positive roots of the dispersion relation.
pub fn dispersion_roots(params: &BoxParams, count: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let a = params.a;
    if params.m == 0.0 {
        return Ok((1..=count).map(|j| (2 * j - 1) as f64 * PI / (4.0 * a)).collect());
    }
    // Root j sits in ((j - 1/2) pi, j pi) in units of 2ak; scan in steps of
    // pi/2 starting from pi/2 so the grid never lands on a root.
    let step = PI / (4.0 * a);
    let f = |k: f64| dispersion(params, k);
    let brackets = roots::scan_brackets(f, step, step, count, 2 * count + 4);
    let mut out = Vec::with_capacity(count);
    for j in 1..=count {
        let idx = j as i32;
        let &(lo, hi) = brackets.get(j - 1).ok_or(Error::RootNotBracketed { index: idx })?;
        let expect_lo = (2 * j - 1) as f64 * step;
        let expect_hi = (2 * j) as f64 * step;
        if (lo - expect_lo).abs() > 1e-9 * step || (hi - expect_hi).abs() > 1e-9 * step {
            return Err(Error::RootNotBracketed { index: idx });
        }
        let k = roots::refine(f, lo, hi, 4.0 * f64::EPSILON * hi).ok_or(Error::RootNotConverged { index: idx })?;
        out.push(k);
    }
    Ok(out)
}

/// Number of sign changes of the dispersion relation on `(0, k_max]`,
/// counted on a grid of spacing `pi / (4a)` offset by half a step so that
/// no grid point coincides with a massless root, closed off at `k_max`.
pub fn dispersion_root_count(params: &BoxParams, k_max: f64) -> usize {
    let step = PI / (4.0 * params.a);
    let start = 0.5 * step;
    if k_max <= start {
        return 0;
    }
    let steps = ((k_max - start) / step).floor() as usize;
    let grid = (0..=steps).map(|i| start + i as f64 * step).chain(core::iter::once(k_max));
    let signs: Vec<bool> = grid.map(|k| dispersion(params, k) > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Builds the `2 n_max` lowest-|energy| modes.
pub fn build_basis(params: BoxParams, n_max: usize) -> Result<Basis> {
    params.validate()?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("basis size must be at least 1".into()));
    }
    if n_max > i32::MAX as usize / 2 {
        return Err(Error::InvalidParameter("basis size too large".into()));
    }
    let ks = dispersion_roots(&params, n_max)?;
    let positive: Vec<Mode> = ks.iter().enumerate().map(|(j, &k)| Mode::new(j as i32 + 1, k, &params)).collect();
    let negative: Vec<Mode> = ks.iter().enumerate().map(|(j, &k)| Mode::new(-(j as i32) - 1, k, &params)).collect();
    let basis = Basis { params, positive, negative };
    basis.check_ordering()?;
    Ok(basis)
}

impl Basis {
    pub fn params(&self) -> &BoxParams {
        &self.params
    }

    pub fn n_max(&self) -> usize {
        self.positive.len()
    }

    pub fn mode(&self, n: i32) -> Option<&Mode> {
        match n {
            0 => None,
            n if n > 0 => self.positive.get(n as usize - 1),
            n => self.negative.get((-n) as usize - 1),
        }
    }

    pub fn try_mode(&self, n: i32) -> Result<&Mode> {
        self.mode(n).ok_or(Error::MissingMode(n))
    }

    pub fn energy(&self, n: i32) -> Option<f64> {
        self.mode(n).map(|m| m.energy)
    }

    pub fn contains(&self, n: i32) -> bool {
        self.mode(n).is_some()
    }

    /// All modes in ascending energy order.
    pub fn iter(&self) -> impl Iterator<Item = &Mode> {
        self.negative.iter().rev().chain(self.positive.iter())
    }

    /// Signed indices with `0 < |n| <= cutoff`, ascending by |n|, negative first.
    pub fn indices_up_to(&self, cutoff: usize) -> impl Iterator<Item = i32> {
        let c = cutoff.min(self.n_max()) as i32;
        (1..=c).flat_map(|j| [-j, j])
    }

    fn check_ordering(&self) -> Result<()> {
        let thr = self.params.degeneracy_threshold();
        let modes: Vec<&Mode> = self.iter().collect();
        for pair in modes.windows(2) {
            let gap = pair[1].energy - pair[0].energy;
            if gap <= thr {
                return Err(Error::Degenerate { m: pair[0].index, n: pair[1].index, gap });
            }
        }
        if let (Some(lo), Some(hi)) = (self.negative.first(), self.positive.first()) {
            if !(lo.energy < 0.0 && hi.energy > 0.0) {
                return Err(Error::Degenerate { m: lo.index, n: hi.index, gap: hi.energy - lo.energy });
            }
        }
        Ok(())
    }

    /// `<phi_m, phi_n>` by panel quadrature.
    pub fn overlap(&self, m: i32, n: i32, quad: &PanelQuadrature) -> Result<Complex64> {
        let (pm, pn) = (self.try_mode(m)?, self.try_mode(n)?);
        let (lo, hi) = self.params.interval();
        quad.integrate(&[(lo, hi)], pm.momentum + pn.momentum, |y| pm.eval(y).dot(&pn.eval(y)))
            .map(|e| e.value)
            .map_err(|estimate| Error::Quadrature { m, n, estimate })
    }

    /// Largest `|<phi_m, phi_n> - delta_mn|` over all stored pairs with
    /// `|m|, |n| <= cutoff`.
    pub fn orthonormality_defect(&self, cutoff: usize) -> Result<f64> {
        let quad = PanelQuadrature::new(20, 1e-13);
        let idx: Vec<i32> = self.indices_up_to(cutoff).collect();
        let mut worst: f64 = 0.0;
        for (i, &m) in idx.iter().enumerate() {
            for &n in &idx[i..] {
                let o = self.overlap(m, n, &quad)?;
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((o - target).norm());
            }
        }
        Ok(worst)
    }

    /// Largest pointwise eigen-residual over `points` equally spaced samples
    /// (walls included), for every mode in the basis.
    pub fn eigen_residual(&self, points: usize) -> f64 {
        let grid = uniform_grid(self.params.a, points);
        self.iter()
            .flat_map(|mode| grid.iter().map(move |&y| mode.residual_at(y)))
            .fold(0.0, f64::max)
    }

    /// L2 norm of what is left of `test` after projecting onto the modes with
    /// `0 < |n| <= cutoff`.
    pub fn completeness_defect_spinor<F: Fn(f64) -> Spinor>(&self, cutoff: usize, test: F) -> Result<f64> {
        if cutoff == 0 || cutoff > self.n_max() {
            return Err(Error::InvalidParameter(alloc::format!(
                "completeness cutoff {cutoff} outside 1..={}",
                self.n_max()
            )));
        }
        let rule = GaussLegendre::new(20);
        let (lo, hi) = self.params.interval();
        let k_top = self.try_mode(cutoff as i32)?.momentum;
        let panels = ((hi - lo) * k_top / PI).ceil() as usize + 8;
        let mut pts = Vec::new();
        rule.for_each_point(lo, hi, panels, |y, w| pts.push((y, w, test(y))));

        let modes: Vec<&Mode> = self.indices_up_to(cutoff).map(|n| self.mode(n).unwrap()).collect();
        let coeffs: Vec<Complex64> = modes
            .iter()
            .map(|mode| pts.iter().map(|&(y, w, g)| mode.eval(y).dot(&g) * w).sum())
            .collect();
        let defect_sqr: f64 = pts
            .iter()
            .map(|&(y, w, g)| {
                let approx = modes
                    .iter()
                    .zip(&coeffs)
                    .fold(Spinor::ZERO, |acc, (mode, &c)| acc + mode.eval(y) * c);
                (g - approx).norm_sqr() * w
            })
            .sum();
        Ok(defect_sqr.sqrt())
    }

    /// Completeness defect for a scalar test function placed in each spinor
    /// slot in turn; the two slot defects are combined in quadrature.
    pub fn completeness_defect<F: Fn(f64) -> Complex64>(&self, cutoff: usize, test: F) -> Result<f64> {
        let up = self.completeness_defect_spinor(cutoff, |y| Spinor::new(test(y), ZERO))?;
        let down = self.completeness_defect_spinor(cutoff, |y| Spinor::new(ZERO, test(y)))?;
        Ok((up * up + down * down).sqrt())
    }
}

/// `points` equally spaced samples on `[-a, a]`, walls included.
pub fn uniform_grid(a: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..points).map(|i| -a + 2.0 * a * i as f64 / (points - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn massless() -> Basis {
        build_basis(BoxParams::new(1.0, 0.0).unwrap(), 12).unwrap()
    }

    #[test]
    fn massless_ground_state_closed_form() {
        let b = massless();
        let m1 = b.mode(1).unwrap();
        let k = PI / 4.0;
        assert!((m1.energy - k).abs() < 1e-15);
        assert!((m1.momentum - k).abs() < 1e-15);
        for &y in &[-1.0, -0.3, 0.2, 0.9] {
            let phi = m1.eval(y);
            let s = y + 1.0;
            assert!((phi.upper.re - (k * s).sin() / 2f64.sqrt()).abs() < 1e-14);
            assert!((phi.lower.re - (k * s).cos() / 2f64.sqrt()).abs() < 1e-14);
        }
        assert!((b.energy(-1).unwrap() + k).abs() < 1e-15);
    }

    #[test]
    fn walls_satisfy_bag_condition() {
        for m in [0.0, 0.7, 3.0] {
            let b = build_basis(BoxParams::new(1.3, m).unwrap(), 10).unwrap();
            for mode in b.iter() {
                assert!(mode.eval(-1.3).upper.norm() < 1e-14);
                assert!(mode.eval(1.3).lower.norm() < 1e-12, "m={m} n={}", mode.index);
            }
        }
    }

    #[test]
    fn massive_roots_solve_dispersion() {
        let p = BoxParams::new(1.0, 1.0).unwrap();
        let ks = dispersion_roots(&p, 30).unwrap();
        for (j, &k) in ks.iter().enumerate() {
            assert!(dispersion(&p, k).abs() < 1e-12 * k.max(1.0));
            let lo = (2 * j + 1) as f64 * PI / 4.0;
            assert!(k > lo && k < lo + PI / 4.0);
        }
    }

    #[test]
    fn tiny_mass_is_still_bracketed() {
        let p = BoxParams::new(1.0, 1e-6).unwrap();
        let ks = dispersion_roots(&p, 50).unwrap();
        assert!((ks[0] - PI / 4.0).abs() < 1e-5);
    }

    #[test]
    fn orthonormal_and_residual_free() {
        for m in [0.0, 1.0] {
            let b = build_basis(BoxParams::new(1.0, m).unwrap(), 8).unwrap();
            assert!(b.orthonormality_defect(8).unwrap() < 1e-10);
            assert!(b.eigen_residual(101) < 1e-8);
        }
    }

    #[test]
    fn massless_spectrum_is_symmetric() {
        let b = massless();
        for n in 1..=12 {
            assert_eq!(b.energy(-n).unwrap(), -b.energy(n).unwrap());
        }
    }

    #[test]
    fn root_count_grows_linearly() {
        for m in [0.0, 1.0, 5.0] {
            let p = BoxParams::new(1.0, m).unwrap();
            for k_max in [10.0, 20.0, 40.0, 80.0] {
                let count = dispersion_root_count(&p, k_max);
                let expect = 2.0 * k_max / PI;
                assert!((count as f64 - expect).abs() <= 1.0, "m={m} K={k_max}: {count} vs {expect}");
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BoxParams::new(0.0, 0.0).is_err());
        assert!(BoxParams::new(1.0, -1.0).is_err());
        assert!(build_basis(BoxParams::default(), 0).is_err());
    }

    #[test]
    fn completeness_of_zero_and_members() {
        let b = massless();
        assert_eq!(b.completeness_defect(5, |_| Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        let m3 = *b.mode(3).unwrap();
        assert!(b.completeness_defect_spinor(3, |y| m3.eval(y)).unwrap() < 1e-10);
        assert!(b.completeness_defect(13, |_| Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn completeness_improves_with_cutoff() {
        let b = build_basis(BoxParams::default(), 20).unwrap();
        let f = |y: f64| Complex64::new((PI * y / 2.0).cos(), 0.0);
        let d5 = b.completeness_defect(5, f).unwrap();
        let d20 = b.completeness_defect(20, f).unwrap();
        assert!(d20 < d5, "{d20} !< {d5}");
    }
}
