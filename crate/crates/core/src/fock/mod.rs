//! Exact second-quantized oracle on a truncated set of modes.
//!
//! Modes are ordered `-K_neg, ..., -1, 1, ..., K_pos` and mode `p` in that
//! order is bit `p` of a [`FockState`]. Creation operators carry the
//! Jordan–Wigner sign `(-1)^(occupied modes before p)`.

mod sparse;

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::elements::{IndexWindow, MatrixElementTable};
use crate::error::{Error, Result};
use crate::vacuum::Truncation;

pub use sparse::SparseMatrix;

/// Largest number of modes the oracle will diagonalize.
pub const MAX_MODES: usize = 16;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeWindow {
    pub k_neg: usize,
    pub k_pos: usize,
}

impl ModeWindow {
    pub fn new(k_neg: usize, k_pos: usize) -> Result<Self> {
        let w = Self { k_neg, k_pos };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neg == 0 || self.k_pos == 0 {
            return Err(Error::InvalidParameter("mode window needs at least one level of each sign".into()));
        }
        if self.len() > MAX_MODES {
            return Err(Error::WindowTooLarge(self.len()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.k_neg + self.k_pos
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mode indices in bit order.
    pub fn modes(&self) -> Vec<i32> {
        (1..=self.k_neg as i32).rev().map(|j| -j).chain(1..=self.k_pos as i32).collect()
    }

    pub fn bit(&self, n: i32) -> Option<usize> {
        match n {
            n if n < 0 && (-n) as usize <= self.k_neg => Some(self.k_neg - (-n) as usize),
            n if n > 0 && n as usize <= self.k_pos => Some(self.k_neg + n as usize - 1),
            _ => None,
        }
    }

    pub fn fock_dim(&self) -> usize {
        1 << self.len()
    }

    pub fn index_window(&self) -> IndexWindow {
        IndexWindow::square(self.k_neg, self.k_pos)
    }
}

/// Occupation bitmask over a [`ModeWindow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockState(pub u32);

impl FockState {
    pub const BARE: FockState = FockState(0);

    pub fn particle_count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_occupied(self, bit: usize) -> bool {
        self.0 >> bit & 1 == 1
    }

    /// `a_bit† |self>` as (sign, state).
    pub fn create(self, bit: usize) -> Option<(f64, FockState)> {
        if self.is_occupied(bit) {
            return None;
        }
        Some((self.sign_below(bit), FockState(self.0 | 1 << bit)))
    }

    /// `a_bit |self>` as (sign, state).
    pub fn annihilate(self, bit: usize) -> Option<(f64, FockState)> {
        if !self.is_occupied(bit) {
            return None;
        }
        Some((self.sign_below(bit), FockState(self.0 & !(1 << bit))))
    }

    /// `a_s† a_r |self>` as (sign, state).
    pub fn hop(self, s: usize, r: usize) -> Option<(f64, FockState)> {
        let (s1, mid) = self.annihilate(r)?;
        let (s2, out) = mid.create(s)?;
        Some((s1 * s2, out))
    }

    fn sign_below(self, bit: usize) -> f64 {
        if (self.0 & ((1u32 << bit) - 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Which single-particle levels the vacuum fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum VacuumChoice {
    /// Every negative level in the window.
    Standard,
    /// Only `-1..=-l`; deeper levels stay empty.
    Band { l: usize },
}

impl VacuumChoice {
    pub fn filled_depth(&self, window: &ModeWindow) -> usize {
        match *self {
            VacuumChoice::Standard => window.k_neg,
            VacuumChoice::Band { l } => l,
        }
    }

    fn validate(&self, window: &ModeWindow) -> Result<()> {
        if let VacuumChoice::Band { l } = *self {
            if l == 0 || l >= window.k_neg {
                return Err(Error::InvalidParameter(alloc::format!(
                    "band vacuum needs 1 <= L < K_neg = {}, got L = {l}",
                    window.k_neg
                )));
            }
        }
        Ok(())
    }

    pub fn is_filled(&self, window: &ModeWindow, n: i32) -> bool {
        n < 0 && (-n) as usize <= self.filled_depth(window)
    }

    pub fn state(&self, window: &ModeWindow) -> FockState {
        let depth = self.filled_depth(window) as i32;
        FockState((1..=depth).map(|j| 1u32 << window.bit(-j).unwrap()).fold(0, |a, b| a | b))
    }

    /// Truncation under which the single-particle sums see exactly the
    /// excitations this vacuum has inside `window`.
    pub fn truncation(&self, window: &ModeWindow) -> Truncation {
        let l = self.filled_depth(window);
        Truncation { l, m_inner: window.k_pos, depth: window.k_neg - l }
    }
}

/// Second-quantized operators on the full truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    window: ModeWindow,
    vacuum: VacuumChoice,
    modes: Vec<i32>,
    energies: Vec<f64>,
    /// `V_{s,r}` in bit order, row major.
    one_body: Vec<Complex64>,
    xi_ren: f64,
    creation: Vec<SparseMatrix>,
}

/// Builds `a†`, `H0 = sum eps n - xi_ren` and `V = sum V_sr a_s† a_r`.
/// `xi_ren` is the free energy of the chosen vacuum, so that vacuum has
/// eigenvalue exactly zero.
pub fn build_operators(table: &MatrixElementTable, window: ModeWindow, vacuum: VacuumChoice) -> Result<FockOperatorSet> {
    window.validate()?;
    vacuum.validate(&window)?;
    let modes = window.modes();
    let energies = modes.iter().map(|&n| table.try_energy(n)).collect::<Result<Vec<_>>>()?;
    let mut one_body = Vec::with_capacity(modes.len() * modes.len());
    for &s in &modes {
        for &r in &modes {
            one_body.push(table.try_get(s, r)?);
        }
    }
    let mut xi = crate::sum::CompensatedSum::new();
    for (&n, &e) in modes.iter().zip(&energies) {
        if vacuum.is_filled(&window, n) {
            xi.add(e);
        }
    }
    let dim = window.fock_dim();
    let creation = (0..modes.len())
        .map(|p| {
            SparseMatrix::from_triplets(
                dim,
                (0..dim as u32).filter_map(|s| FockState(s).create(p).map(|(sign, t)| (t.0 as usize, s as usize, Complex64::new(sign, 0.0)))),
            )
        })
        .collect();
    Ok(FockOperatorSet { window, vacuum, modes, energies, one_body, xi_ren: xi.value(), creation })
}

/// Exact vacuum shift from diagonalizing `H0 + coupling * V` in the
/// vacuum's particle-number sector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExactShift {
    pub coupling: f64,
    /// Eigenvalue of the state continuously connected to the vacuum.
    pub shift: f64,
    /// `|<vac|psi>|²` of that state.
    pub overlap: f64,
    pub sector_dim: usize,
    /// Sector eigenvalues strictly below the tracked vacuum.
    pub states_below: usize,
    pub sector_ground: f64,
}

/// Free sector spectrum seen from the chosen vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FreeSectorReport {
    pub sector_dim: usize,
    pub lowest: f64,
    /// Free eigenvalues strictly below the vacuum's zero.
    pub negative_count: usize,
    /// Set when some state in the sector lies below the vacuum.
    pub below_vacuum: bool,
}

/// Defects of the operator identities, all expected to be exactly zero
/// except the last two (floating-point `V`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityReport {
    /// `{a_m, a_n†} = delta_mn`, `{a_m, a_n} = {a_m†, a_n†} = 0`.
    pub anticommutators: f64,
    /// `<0| a_m† a_n |0>` against the filling of the vacuum.
    pub occupations: f64,
    /// `<0| a_s† a_r a_m† a_-n |0> = delta_{-n,s} delta_{m,r}`.
    pub four_point: f64,
    /// `<0|H0|0>`
    pub vacuum_energy: f64,
    /// Smallest `H0` eigenvalue in the vacuum sector other than the vacuum,
    /// minus the vacuum's. Positive for the standard vacuum.
    pub free_gap: f64,
    /// `max |<0| V a_m† a_-n |0> - V_{-n,m}|`
    pub vacuum_coupling: f64,
    /// `max(|H0 - H0†|, |V - V†|, |[V, N]|)`
    pub hermiticity_and_charge: f64,
}

impl IdentityReport {
    pub fn max_exact_defect(&self) -> f64 {
        self.anticommutators.max(self.occupations).max(self.four_point).max(self.vacuum_energy.abs())
    }
}

impl FockOperatorSet {
    pub fn window(&self) -> &ModeWindow {
        &self.window
    }

    pub fn vacuum(&self) -> VacuumChoice {
        self.vacuum
    }

    pub fn vacuum_state(&self) -> FockState {
        self.vacuum.state(&self.window)
    }

    pub fn xi_ren(&self) -> f64 {
        self.xi_ren
    }

    pub fn dim(&self) -> usize {
        self.window.fock_dim()
    }

    fn bit(&self, n: i32) -> Result<usize> {
        self.window.bit(n).ok_or(Error::MissingMode(n))
    }

    pub fn creation(&self, n: i32) -> Result<&SparseMatrix> {
        Ok(&self.creation[self.bit(n)?])
    }

    pub fn annihilation(&self, n: i32) -> Result<SparseMatrix> {
        Ok(self.creation(n)?.adjoint())
    }

    /// Free energy of a basis state, measured from the vacuum: particles
    /// added above it minus holes dug into it, so the vacuum itself gives
    /// exactly zero rather than `sum - xi_ren` rounding.
    pub fn free_energy(&self, state: FockState) -> f64 {
        let vac = self.vacuum_state();
        let mut acc = crate::sum::CompensatedSum::new();
        for (p, &e) in self.energies.iter().enumerate() {
            match (state.is_occupied(p), vac.is_occupied(p)) {
                (true, false) => acc.add(e),
                (false, true) => acc.add(-e),
                _ => {}
            }
        }
        acc.value()
    }

    pub fn h0_op(&self) -> SparseMatrix {
        SparseMatrix::diagonal((0..self.dim() as u32).map(|s| Complex64::new(self.free_energy(FockState(s)), 0.0)))
    }

    pub fn number_op(&self) -> SparseMatrix {
        SparseMatrix::diagonal((0..self.dim() as u32).map(|s| Complex64::new(FockState(s).particle_count() as f64, 0.0)))
    }

    fn one_body(&self, s: usize, r: usize) -> Complex64 {
        self.one_body[s * self.modes.len() + r]
    }

    /// `V|state>` as (state, amplitude) pairs.
    fn v_column(&self, state: FockState) -> Vec<(FockState, Complex64)> {
        let n = self.modes.len();
        let mut out = Vec::new();
        for r in (0..n).filter(|&r| state.is_occupied(r)) {
            for s in 0..n {
                if let Some((sign, t)) = state.hop(s, r) {
                    let v = self.one_body(s, r);
                    if v != ZERO {
                        out.push((t, v * sign));
                    }
                }
            }
        }
        out
    }

    /// `V` on the full Fock space.
    pub fn v_op(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(
            self.dim(),
            (0..self.dim() as u32).flat_map(|s| {
                self.v_column(FockState(s)).into_iter().map(move |(t, v)| (t.0 as usize, s as usize, v))
            }),
        )
    }

    /// Basis states with the vacuum's particle number, ascending.
    pub fn sector_states(&self) -> Vec<FockState> {
        let count = self.vacuum_state().particle_count();
        (0..self.dim() as u32).map(FockState).filter(|s| s.particle_count() == count).collect()
    }

    /// Sorted `H0` eigenvalues in the vacuum sector.
    pub fn free_sector_spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.sector_states().into_iter().map(|s| self.free_energy(s)).collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    pub fn free_sector_report(&self) -> FreeSectorReport {
        let spec = self.free_sector_spectrum();
        let negative_count = spec.iter().filter(|&&e| e < 0.0).count();
        FreeSectorReport { sector_dim: spec.len(), lowest: spec[0], negative_count, below_vacuum: negative_count > 0 }
    }

    /// Dense `H0 + coupling * V` on the vacuum sector.
    pub fn sector_hamiltonian(&self, coupling: f64) -> (Vec<FockState>, DMatrix<Complex64>) {
        let states = self.sector_states();
        let pos = |s: FockState| states.binary_search(&s).expect("V conserves particle number");
        let dim = states.len();
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for (j, &s) in states.iter().enumerate() {
            h[(j, j)] += Complex64::new(self.free_energy(s), 0.0);
            if coupling != 0.0 {
                for (t, v) in self.v_column(s) {
                    h[(pos(t), j)] += v * coupling;
                }
            }
        }
        (states, h)
    }

    /// Checks the operator algebra and the vacuum expectation values.
    pub fn expectation_identities(&self) -> Result<IdentityReport> {
        let n = self.modes.len();
        let dim = self.dim();
        let ann: Vec<SparseMatrix> = self.creation.iter().map(SparseMatrix::adjoint).collect();
        let id = SparseMatrix::identity(dim);
        let mut anti: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                let mixed = ann[p].anticommutator(&self.creation[q]);
                let target = if p == q { id.clone() } else { SparseMatrix::zeros(dim) };
                anti = anti.max(mixed.sub(&target).max_abs());
                anti = anti.max(ann[p].anticommutator(&ann[q]).max_abs());
                anti = anti.max(self.creation[p].anticommutator(&self.creation[q]).max_abs());
            }
        }

        let vac = self.vacuum_state();
        let mut ket = alloc::vec![ZERO; dim];
        ket[vac.0 as usize] = ONE;

        let mut occupations: f64 = 0.0;
        for (p, &m) in self.modes.iter().enumerate() {
            for (q, &k) in self.modes.iter().enumerate() {
                let op = self.creation[p].mul(&ann[q]);
                let got = op.expectation(&ket, &ket);
                let expect = if m == k && self.vacuum.is_filled(&self.window, k) { ONE } else { ZERO };
                occupations = occupations.max((got - expect).norm());
            }
        }

        let filled: Vec<i32> = self.modes.iter().copied().filter(|&k| self.vacuum.is_filled(&self.window, k)).collect();
        let empty: Vec<i32> = self.modes.iter().copied().filter(|&k| !self.vacuum.is_filled(&self.window, k)).collect();
        let v = self.v_op();
        let mut four_point: f64 = 0.0;
        let mut vacuum_coupling: f64 = 0.0;
        for &m in &empty {
            for &hole in &filled {
                // |k> = a_m† a_hole |0>
                let k_state = ann[self.bit(hole)?].apply(&ket);
                let k_state = self.creation[self.bit(m)?].apply(&k_state);
                for (s_bit, &s) in self.modes.iter().enumerate() {
                    for (r_bit, &r) in self.modes.iter().enumerate() {
                        let op = self.creation[s_bit].mul(&ann[r_bit]);
                        let got = op.expectation(&ket, &k_state);
                        let expect = if s == hole && r == m { ONE } else { ZERO };
                        four_point = four_point.max((got - expect).norm());
                    }
                }
                let got = v.expectation(&ket, &k_state);
                let expect = self.one_body(self.bit(hole)?, self.bit(m)?);
                vacuum_coupling = vacuum_coupling.max((got - expect).norm());
            }
        }

        let h0 = self.h0_op();
        let herm = h0.hermiticity_defect().max(v.hermiticity_defect()).max(v.commutator(&self.number_op()).max_abs());

        let vacuum_energy = h0.expectation(&ket, &ket).re;
        let free_gap = self
            .sector_states()
            .into_iter()
            .filter(|&s| s != vac)
            .map(|s| self.free_energy(s))
            .fold(f64::INFINITY, f64::min)
            - self.free_energy(vac);

        Ok(IdentityReport {
            anticommutators: anti,
            occupations,
            four_point,
            vacuum_energy,
            free_gap,
            vacuum_coupling,
            hermiticity_and_charge: herm,
        })
    }

    /// Diagonalizes `H0 + coupling * V` in the vacuum sector and follows the
    /// eigenstate with the largest vacuum overlap, which for the band vacuum
    /// is generally not the sector ground state.
    pub fn exact_vacuum_shift(&self, coupling: f64) -> Result<ExactShift> {
        let (states, h) = self.sector_hamiltonian(coupling);
        let vac = states.binary_search(&self.vacuum_state()).unwrap();
        let dim = states.len();
        let eig = SymmetricEigen::new(h);
        let (best, overlap) = (0..dim)
            .map(|k| (k, eig.eigenvectors[(vac, k)].norm_sqr()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if overlap < 0.5 {
            return Err(Error::WeakOverlap(overlap));
        }
        let shift = eig.eigenvalues[best];
        let tol = 1e-12 * (1.0 + shift.abs());
        let states_below = eig.eigenvalues.iter().filter(|&&e| e < shift - tol).count();
        let sector_ground = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(ExactShift { coupling, shift, overlap, sector_dim: dim, states_below, sector_ground })
    }

    /// First- and second-order vacuum shifts summed over the free many-body
    /// eigenstates of the sector.
    pub fn pt_from_spectrum(&self) -> Result<(f64, f64)> {
        let vac = self.vacuum_state();
        let e_vac = self.free_energy(vac);
        // <0|V|k> = conj(<k|V|0>)
        let column = self.v_column(vac);
        let mut e1 = crate::sum::CompensatedSum::new();
        let mut couplings: Vec<(FockState, Complex64)> = Vec::new();
        for (t, v) in column {
            if t == vac {
                e1.add(v.re);
            } else {
                match couplings.iter_mut().find(|(s, _)| *s == t) {
                    Some((_, acc)) => *acc += v,
                    None => couplings.push((t, v)),
                }
            }
        }
        couplings.sort_by_key(|&(s, _)| s);
        let mut e2 = crate::sum::CompensatedSum::new();
        for (t, v) in couplings {
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let denom = e_vac - self.free_energy(t);
            if denom.abs() <= 1e-12 {
                return Err(Error::VanishingDenominator(t.0));
            }
            e2.add(v.norm_sqr() / denom);
        }
        Ok((e1.value(), e2.value()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, BoxParams};
    use crate::elements::build_table;
    use crate::potential::Potential;

    fn ops(k_neg: usize, k_pos: usize, vac: VacuumChoice, pot: Option<Potential>) -> FockOperatorSet {
        let p = BoxParams::default();
        let b = build_basis(p, k_neg.max(k_pos)).unwrap();
        let pot = pot.unwrap_or_else(|| Potential::step_well(-1.0, 0.5, &p).unwrap());
        let w = ModeWindow::new(k_neg, k_pos).unwrap();
        let t = build_table(&b, &pot, w.index_window()).unwrap();
        build_operators(&t, w, vac).unwrap()
    }

    #[test]
    fn window_bits_follow_index_order() {
        let w = ModeWindow::new(3, 2).unwrap();
        assert_eq!(w.modes(), alloc::vec![-3, -2, -1, 1, 2]);
        assert_eq!(w.bit(-3), Some(0));
        assert_eq!(w.bit(-1), Some(2));
        assert_eq!(w.bit(2), Some(4));
        assert_eq!(w.bit(3), None);
        assert!(ModeWindow::new(9, 8).is_err());
        assert!(ModeWindow::new(0, 2).is_err());
    }

    #[test]
    fn jordan_wigner_signs() {
        let s = FockState(0b101);
        assert_eq!(s.create(1), Some((-1.0, FockState(0b111))));
        assert_eq!(s.create(3), Some((1.0, FockState(0b1101))));
        assert_eq!(s.annihilate(2), Some((-1.0, FockState(0b001))));
        assert_eq!(s.create(0), None);
        assert_eq!(s.hop(1, 2), Some((1.0, FockState(0b011))));
    }

    #[test]
    fn zero_potential_gives_zero_v() {
        let o = ops(2, 2, VacuumChoice::Standard, Some(Potential::zero(&BoxParams::default())));
        assert_eq!(o.v_op().nnz(), 0);
        let e = o.exact_vacuum_shift(1.0).unwrap();
        assert_eq!(e.shift, 0.0);
        assert!((e.overlap - 1.0).abs() < 1e-15);
        assert_eq!(o.pt_from_spectrum().unwrap(), (0.0, 0.0));
    }

    #[test]
    fn vacuum_has_zero_energy_and_positive_gap() {
        let o = ops(3, 3, VacuumChoice::Standard, None);
        let r = o.expectation_identities().unwrap();
        assert_eq!(r.vacuum_energy, 0.0);
        assert_eq!(r.max_exact_defect(), 0.0);
        assert!(r.vacuum_coupling < 1e-14);
        assert!(r.free_gap > 0.0);
        let spec = o.free_sector_spectrum();
        assert_eq!(spec[0], 0.0);
        assert!(spec[1] > 0.0);
    }

    #[test]
    fn band_vacuum_has_states_below() {
        let o = ops(4, 3, VacuumChoice::Band { l: 2 }, None);
        let r = o.expectation_identities().unwrap();
        assert_eq!(r.max_exact_defect(), 0.0);
        assert!(r.free_gap < 0.0);
        let f = o.free_sector_report();
        assert!(f.below_vacuum && f.lowest < 0.0);
        assert!(!ops(3, 3, VacuumChoice::Standard, None).free_sector_report().below_vacuum);
        let e = o.exact_vacuum_shift(0.1).unwrap();
        assert!(e.states_below > 0);
    }

    #[test]
    fn band_requires_empty_levels_below() {
        let p = BoxParams::default();
        let b = build_basis(p, 3).unwrap();
        let w = ModeWindow::new(3, 3).unwrap();
        let t = build_table(&b, &Potential::zero(&p), w.index_window()).unwrap();
        assert!(build_operators(&t, w, VacuumChoice::Band { l: 3 }).is_err());
        assert!(build_operators(&t, w, VacuumChoice::Band { l: 0 }).is_err());
    }

    #[test]
    fn strong_coupling_loses_adiabatic_state() {
        let o = ops(2, 2, VacuumChoice::Standard, None);
        assert!(matches!(o.exact_vacuum_shift(200.0), Err(Error::WeakOverlap(_))));
    }
}
