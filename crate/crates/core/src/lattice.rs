//! Finite-difference cross-check of the analytic spectrum.
//!
//! `H0` is discretized with symmetric differences plus a Wilson term with
//! `r = 1`. For that value the Wilson and kinetic hops combine into one-sided
//! hops, so the upper component sits on integer sites and the lower one on
//! half-shifted sites:
//!
//! ```text
//! (H psi)_upper,j = (m + 1/h) lower_j - lower_{j+1} / h
//! (H psi)_lower,j = (m + 1/h) upper_j - upper_{j-1} / h
//! ```
//!
//! With `h = 2a / (N + 1/2)`, `upper_0` sits on the left wall and
//! `lower_{N+1}` on the right wall, and both are held at zero. Interleaving
//! `lower_1, upper_1, lower_2, ...` gives a symmetric tridiagonal matrix with
//! zero diagonal, whose eigenvalues come from Sturm-sequence bisection.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{BoxParams, Basis};
use crate::error::{Error, Result};

/// Zero-diagonal symmetric tridiagonal lattice Hamiltonian.
#[derive(Debug, Clone)]
pub struct LatticeHamiltonian {
    sites: usize,
    spacing: f64,
    off_diagonal: Vec<f64>,
}

impl LatticeHamiltonian {
    pub fn new(params: &BoxParams, sites: usize) -> Result<Self> {
        params.validate()?;
        if sites < 2 {
            return Err(Error::InvalidParameter(alloc::format!("lattice needs at least 2 sites, got {sites}")));
        }
        let h = 2.0 * params.a / (sites as f64 + 0.5);
        let on_site = params.m + 1.0 / h;
        let hop = -1.0 / h;
        let off_diagonal = (0..2 * sites - 1).map(|i| if i % 2 == 0 { on_site } else { hop }).collect();
        Ok(Self { sites, spacing: h, off_diagonal })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dim(&self) -> usize {
        2 * self.sites
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = -x;
        if q < 0.0 {
            count += 1;
        }
        for &e in &self.off_diagonal {
            let prev = if q == 0.0 { f64::EPSILON * (e.abs() + x.abs()).max(f64::MIN_POSITIVE) } else { q };
            q = -x - e * e / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bound(&self) -> f64 {
        let mut g: f64 = 0.0;
        for i in 0..self.dim() {
            let left = if i > 0 { self.off_diagonal[i - 1].abs() } else { 0.0 };
            let right = self.off_diagonal.get(i).map_or(0.0, |e| e.abs());
            g = g.max(left + right);
        }
        g
    }

    /// The `i`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, i: usize) -> f64 {
        assert!(i < self.dim());
        let g = self.bound();
        let (mut lo, mut hi) = (-g, g);
        let tol = 4.0 * f64::EPSILON * g;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `j`-th positive (`j > 0`) or negative (`j < 0`) eigenvalue counted
    /// outward from zero.
    pub fn signed_level(&self, j: i32) -> f64 {
        let half = self.sites;
        if j > 0 {
            self.eigenvalue(half + j as usize - 1)
        } else {
            self.eigenvalue(half - (-j) as usize)
        }
    }
}

/// One mode compared against the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelComparison {
    pub index: i32,
    pub analytic: f64,
    pub lattice: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridComparison {
    pub sites: usize,
    pub spacing: f64,
    pub max_discrepancy: f64,
    pub levels: Vec<LevelComparison>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeReport {
    pub grids: Vec<GridComparison>,
    /// Polynomial extrapolation in the spacing to zero, through all grids.
    /// Present when at least three grids were given.
    pub extrapolated: Option<Vec<LevelComparison>>,
    /// `log(d_i / d_{i+1}) / log(h_i / h_{i+1})` for consecutive grids.
    pub observed_orders: Vec<f64>,
}

impl LatticeReport {
    /// Discrepancies shrink strictly from each grid to the next finer one.
    pub fn is_converging(&self) -> bool {
        self.grids.windows(2).all(|w| w[1].max_discrepancy < w[0].max_discrepancy)
    }

    pub fn finest(&self) -> Option<&GridComparison> {
        self.grids.last()
    }

    pub fn extrapolated_max_discrepancy(&self) -> Option<f64> {
        self.extrapolated.as_ref().map(|ls| ls.iter().map(|l| l.discrepancy).fold(0.0, f64::max))
    }
}

/// Compares the lowest `n_check` positive and negative levels of `basis`
/// against lattice diagonalizations at each of `grid_sizes` (sorted
/// coarse to fine by the caller).
pub fn verify_spectrum_lattice(basis: &Basis, n_check: usize, grid_sizes: &[usize]) -> Result<LatticeReport> {
    if n_check == 0 || n_check > basis.n_max() {
        return Err(Error::InvalidParameter(alloc::format!("n_check {n_check} outside 1..={}", basis.n_max())));
    }
    if grid_sizes.is_empty() {
        return Err(Error::InvalidParameter("at least one grid size is required".into()));
    }
    let params = *basis.params();
    let indices: Vec<i32> = basis.indices_up_to(n_check).collect();

    let mut grids = Vec::with_capacity(grid_sizes.len());
    for &sites in grid_sizes {
        let lat = LatticeHamiltonian::new(&params, sites)?;
        if 2 * n_check + 2 > lat.dim() {
            return Err(Error::InvalidParameter(alloc::format!("grid of {sites} sites too coarse for {n_check} levels")));
        }
        // Candidates: the levels nearest zero on each side, one beyond the
        // checked range so that a crowded window is detected.
        let reach = n_check as i32 + 1;
        let candidates: Vec<f64> = (1..=reach).flat_map(|j| [lat.signed_level(-j), lat.signed_level(j)]).collect();
        let mut levels = Vec::with_capacity(indices.len());
        for &n in &indices {
            let e = basis.energy(n).unwrap();
            let window = 0.5 * neighbour_gap(basis, n);
            let hits: Vec<f64> = candidates.iter().copied().filter(|x| (x - e).abs() < window).collect();
            if hits.len() != 1 {
                return Err(Error::AmbiguousMatch { index: n, count: hits.len() });
            }
            levels.push(LevelComparison { index: n, analytic: e, lattice: hits[0], discrepancy: (hits[0] - e).abs() });
        }
        let max_discrepancy = levels.iter().map(|l| l.discrepancy).fold(0.0, f64::max);
        grids.push(GridComparison { sites, spacing: lat.spacing(), max_discrepancy, levels });
    }

    let observed_orders = grids
        .windows(2)
        .map(|w| (w[0].max_discrepancy / w[1].max_discrepancy).ln() / (w[0].spacing / w[1].spacing).ln())
        .collect();

    let extrapolated = (grids.len() >= 3).then(|| {
        let hs: Vec<f64> = grids.iter().map(|g| g.spacing).collect();
        (0..indices.len())
            .map(|i| {
                let ys: Vec<f64> = grids.iter().map(|g| g.levels[i].lattice).collect();
                let value = neville_at_zero(&hs, &ys);
                let analytic = grids[0].levels[i].analytic;
                LevelComparison { index: indices[i], analytic, lattice: value, discrepancy: (value - analytic).abs() }
            })
            .collect()
    });

    Ok(LatticeReport { grids, extrapolated, observed_orders })
}

fn neighbour_gap(basis: &Basis, n: i32) -> f64 {
    let e = basis.energy(n).unwrap();
    let step = |j: i32| -> i32 {
        match n + j {
            0 => n + 2 * j,
            other => other,
        }
    };
    [step(-1), step(1)]
        .iter()
        .filter_map(|&j| basis.energy(j))
        .map(|x| (x - e).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Value at x = 0 of the interpolating polynomial through (xs, ys).
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use core::f64::consts::PI;

    #[test]
    fn sturm_count_matches_spectrum_size() {
        let lat = LatticeHamiltonian::new(&BoxParams::default(), 50).unwrap();
        assert_eq!(lat.count_below(-1e9), 0);
        assert_eq!(lat.count_below(1e9), 100);
        assert_eq!(lat.count_below(0.0), 50);
    }

    #[test]
    fn lattice_spectrum_is_symmetric() {
        let lat = LatticeHamiltonian::new(&BoxParams::new(1.0, 2.0).unwrap(), 100).unwrap();
        for j in 1..5 {
            assert!((lat.signed_level(j) + lat.signed_level(-j)).abs() < 1e-10);
        }
    }

    #[test]
    fn massless_ground_level_near_closed_form() {
        let b = build_basis(BoxParams::default(), 3).unwrap();
        let r = verify_spectrum_lattice(&b, 1, &[400]).unwrap();
        assert!((r.grids[0].levels[1].lattice - PI / 4.0).abs() < 1e-3);
    }

    #[test]
    fn neville_recovers_polynomial_intercept() {
        let xs = [0.4, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 + 2.0 * x - 5.0 * x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_requests() {
        let b = build_basis(BoxParams::default(), 3).unwrap();
        assert!(verify_spectrum_lattice(&b, 0, &[100]).is_err());
        assert!(verify_spectrum_lattice(&b, 4, &[100]).is_err());
        assert!(verify_spectrum_lattice(&b, 2, &[]).is_err());
        assert!(verify_spectrum_lattice(&b, 3, &[3]).is_err());
    }
}
