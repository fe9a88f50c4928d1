//! Matrix elements `V_{m,n} = ∫ phi_m† V phi_n dy` and their cache.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::PanelQuadrature;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn default_quadrature() -> PanelQuadrature {
    PanelQuadrature::new(16, 1e-10)
}

/// `V_{m,n}` with panels sized from `oversample * (k_m + k_n + k_V)`.
pub fn matrix_element_with(
    basis: &Basis,
    pot: &Potential,
    m: i32,
    n: i32,
    quad: &PanelQuadrature,
    oversample: f64,
) -> Result<Complex64> {
    let (pm, pn) = (basis.try_mode(m)?, basis.try_mode(n)?);
    if pot.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = oversample * (pm.momentum + pn.momentum + pot.wavenumber());
    quad.integrate(&pot.segments(), k, |y| pm.eval(y).dot(&pot.apply(y, pn.eval(y))))
        .map(|e| e.value)
        .map_err(|estimate| Error::Quadrature { m, n, estimate })
}

/// `V_{m,n}` at the default accuracy target (relative 1e-10).
pub fn matrix_element(basis: &Basis, pot: &Potential, m: i32, n: i32) -> Result<Complex64> {
    matrix_element_with(basis, pot, m, n, &default_quadrature(), 1.0)
}

/// Both routes to a pure-gauge matrix element.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaugeIdentity {
    pub m: i32,
    pub n: i32,
    /// `∫ phi_m† (sigma_y chi') phi_n`
    pub direct: Complex64,
    /// `i (eps_m - eps_n) ∫ phi_m† chi phi_n`
    pub via_chi: Complex64,
    pub discrepancy: f64,
}

/// Evaluates `V_{m,n}` directly and through the gauge function itself; the
/// two integrals are independent quadratures of analytically equal values.
pub fn gauge_matrix_element_identity(basis: &Basis, pot: &Potential, m: i32, n: i32) -> Result<GaugeIdentity> {
    if !pot.is_pure_gauge() {
        return Err(Error::NotPureGauge);
    }
    let direct = matrix_element(basis, pot, m, n)?;
    let (pm, pn) = (basis.try_mode(m)?, basis.try_mode(n)?);
    let quad = default_quadrature();
    let k = pm.momentum + pn.momentum + pot.wavenumber();
    let chi_overlap = quad
        .integrate(&pot.segments(), k, |y| pm.eval(y).dot(&pn.eval(y)) * pot.gauge_function(y).unwrap().0)
        .map_err(|estimate| Error::Quadrature { m, n, estimate })?
        .value;
    let via_chi = I * (pm.energy - pn.energy) * chi_overlap;
    Ok(GaugeIdentity { m, n, direct, via_chi, discrepancy: (direct - via_chi).norm() })
}

/// Largest `|d/dy(phi_m† sigma_y phi_n) + i (eps_m - eps_n) phi_m† phi_n|`
/// over `grid`, using analytic derivatives.
pub fn derivative_identity_check(basis: &Basis, m: i32, n: i32, grid: &[f64]) -> Result<f64> {
    let (pm, pn) = (basis.try_mode(m)?, basis.try_mode(n)?);
    let gap = pm.energy - pn.energy;
    Ok(grid
        .iter()
        .map(|&y| {
            let (fm, fn_) = (pm.eval(y), pn.eval(y));
            let (dm, dn) = (pm.derivative(y), pn.derivative(y));
            let left = dm.dot(&fn_.sigma_y()) + fm.dot(&dn.sigma_y());
            let right = -I * gap * fm.dot(&fn_);
            (left - right).norm()
        })
        .fold(0.0, f64::max))
}

/// Row and column index sets of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexWindow {
    pub rows: Vec<i32>,
    pub cols: Vec<i32>,
}

impl IndexWindow {
    /// All `0 < |n| <= cutoff` on both axes.
    pub fn symmetric(cutoff: usize) -> Self {
        let idx = signed_range(cutoff, cutoff);
        Self { rows: idx.clone(), cols: idx }
    }

    /// `-k_neg..=-1` and `1..=k_pos` on both axes.
    pub fn square(k_neg: usize, k_pos: usize) -> Self {
        let idx = signed_range(k_neg, k_pos);
        Self { rows: idx.clone(), cols: idx }
    }

    /// What the vacuum sums need: columns `-l..=-1`, rows
    /// `-(l + depth)..=-1` and `1..=m_inner`.
    pub fn for_vacuum(l: usize, m_inner: usize, depth: usize) -> Self {
        Self { rows: signed_range(l + depth, m_inner), cols: signed_range(l, 0) }
    }

    pub fn len(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn signed_range(neg: usize, pos: usize) -> Vec<i32> {
    (1..=neg as i32).rev().map(|j| -j).chain(1..=pos as i32).collect()
}

/// Cached `V_{m,n}` over a window, with the energies the sums need.
#[derive(Debug, Clone)]
pub struct MatrixElementTable {
    rows: Vec<i32>,
    cols: Vec<i32>,
    row_pos: BTreeMap<i32, usize>,
    col_pos: BTreeMap<i32, usize>,
    values: Vec<Complex64>,
    energies: BTreeMap<i32, f64>,
}

impl MatrixElementTable {
    /// Assembles a table from precomputed values in row-major order.
    pub fn from_values(window: IndexWindow, energies: BTreeMap<i32, f64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "expected {} values, got {}",
                window.len(),
                values.len()
            )));
        }
        for n in window.rows.iter().chain(&window.cols) {
            if *n == 0 || !energies.contains_key(n) {
                return Err(Error::MissingMode(*n));
            }
        }
        let row_pos = window.rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let col_pos = window.cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Ok(Self { rows: window.rows, cols: window.cols, row_pos, col_pos, values, energies })
    }

    pub fn rows(&self) -> &[i32] {
        &self.rows
    }

    pub fn cols(&self) -> &[i32] {
        &self.cols
    }

    fn stored(&self, m: i32, n: i32) -> Option<Complex64> {
        let i = *self.row_pos.get(&m)?;
        let j = *self.col_pos.get(&n)?;
        Some(self.values[i * self.cols.len() + j])
    }

    /// `V_{m,n}`, falling back on `conj(V_{n,m})` when only the transpose
    /// is stored.
    pub fn get(&self, m: i32, n: i32) -> Option<Complex64> {
        self.stored(m, n).or_else(|| self.stored(n, m).map(|v| v.conj()))
    }

    pub fn try_get(&self, m: i32, n: i32) -> Result<Complex64> {
        self.get(m, n).ok_or(Error::MissingElement { m, n })
    }

    pub fn energy(&self, n: i32) -> Option<f64> {
        self.energies.get(&n).copied()
    }

    pub fn try_energy(&self, n: i32) -> Result<f64> {
        self.energy(n).ok_or(Error::MissingMode(n))
    }

    /// Row-major `(m, n, V_{m,n})`.
    pub fn entries(&self) -> impl Iterator<Item = (i32, i32, Complex64)> + '_ {
        self.rows
            .iter()
            .flat_map(move |&m| self.cols.iter().map(move |&n| (m, n)))
            .zip(&self.values)
            .map(|((m, n), &v)| (m, n, v))
    }

    /// Largest `|V_{m,n} - conj(V_{n,m})|` over pairs stored both ways.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .filter_map(|(m, n, v)| self.stored(n, m).map(|w| (v - w.conj()).norm()))
            .fold(0.0, f64::max)
    }

    /// Largest `|V_{n,n}|` on the stored diagonal.
    pub fn max_diagonal(&self) -> f64 {
        self.entries().filter(|(m, n, _)| m == n).map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// Same table with every element multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= lambda);
        out
    }
}

/// Computes every `(row, col)` pair of `window`.
pub fn build_table(basis: &Basis, pot: &Potential, window: IndexWindow) -> Result<MatrixElementTable> {
    let quad = default_quadrature();
    let mut values = Vec::with_capacity(window.len());
    for &m in &window.rows {
        for &n in &window.cols {
            values.push(matrix_element_with(basis, pot, m, n, &quad, 1.0)?);
        }
    }
    let energies = energies_for(basis, &window)?;
    MatrixElementTable::from_values(window, energies, values)
}

/// Energies of every index named in `window`.
pub fn energies_for(basis: &Basis, window: &IndexWindow) -> Result<BTreeMap<i32, f64>> {
    window
        .rows
        .iter()
        .chain(&window.cols)
        .map(|&n| basis.try_mode(n).map(|mode| (n, mode.energy)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, uniform_grid, BoxParams};
    use crate::potential::{make_gauge_potential, ChiSpec, Profile};

    fn setup() -> (Basis, Potential) {
        let p = BoxParams::default();
        (build_basis(p, 8).unwrap(), make_gauge_potential(ChiSpec::sine_series([1.0]), &p).unwrap())
    }

    #[test]
    fn zero_potential_gives_zero_table() {
        let (b, _) = setup();
        let t = build_table(&b, &Potential::zero(b.params()), IndexWindow::symmetric(4)).unwrap();
        assert!(t.entries().all(|(_, _, v)| v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn constant_a0_is_identity() {
        let (b, _) = setup();
        let pot = Potential::general(Profile::Constant { value: 1.0 }, Profile::Zero, b.params()).unwrap();
        let t = build_table(&b, &pot, IndexWindow::square(2, 2)).unwrap();
        for (m, n, v) in t.entries() {
            let target = if m == n { 1.0 } else { 0.0 };
            assert!((v - target).norm() < 1e-10, "({m},{n}) {v}");
        }
    }

    #[test]
    fn gauge_diagonal_vanishes_and_table_is_hermitian() {
        let (b, pot) = setup();
        let t = build_table(&b, &pot, IndexWindow::symmetric(6)).unwrap();
        assert!(t.max_diagonal() < 1e-10);
        assert!(t.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn lookup_falls_back_on_transpose() {
        let (b, pot) = setup();
        let t = build_table(&b, &pot, IndexWindow::for_vacuum(2, 3, 1)).unwrap();
        let v = t.get(2, -1).unwrap();
        assert_eq!(t.get(-1, 2), Some(v.conj()));
        assert!(t.get(4, -1).is_none());
        assert!(matches!(t.try_get(1, 1), Err(Error::MissingElement { .. })));
    }

    #[test]
    fn chi_route_agrees() {
        let (b, pot) = setup();
        let g = gauge_matrix_element_identity(&b, &pot, 2, -1).unwrap();
        assert!(g.direct.norm() > 1e-3 && g.via_chi.norm() > 1e-3);
        assert!(g.discrepancy < 1e-8);
        let d = gauge_matrix_element_identity(&b, &pot, 3, 3).unwrap();
        assert_eq!(d.via_chi, Complex64::new(0.0, 0.0));
        assert!(d.direct.norm() < 1e-10);
    }

    #[test]
    fn derivative_identity_holds() {
        let (b, _) = setup();
        let grid = uniform_grid(1.0, 257);
        for (m, n) in [(1, 1), (-4, -4), (1, -1), (3, 2), (-8, 5)] {
            assert!(derivative_identity_check(&b, m, n, &grid).unwrap() < 1e-10);
        }
    }

    #[test]
    fn doubling_panels_changes_little() {
        let (b, pot) = setup();
        let q = default_quadrature();
        for (m, n) in [(1, -1), (8, -7), (-8, 8)] {
            let coarse = matrix_element_with(&b, &pot, m, n, &q, 1.0).unwrap();
            let fine = matrix_element_with(&b, &pot, m, n, &q, 2.0).unwrap();
            assert!((coarse - fine).norm() < 1e-9);
        }
    }
}
