//! Perturbative level shifts and the vacuum-energy sums built from them.
//!
//! Notation: the occupied band is `-1..=-L`, inner sums over positive levels
//! run to `M_inner`, and the empty levels kept below the band are
//! `-(L+1)..=-(L+D)`. With `V_{m,n}` from a [`MatrixElementTable`]:
//!
//! ```text
//! Y_L   = -sum_{n=1..L} sum_{m=1..M}        |V_{m,-n}|²  / (e_m  - e_-n)
//! X_L1  =  sum_{n=1..L} sum_{m=1..L, m!=n}  |V_{-m,-n}|² / (e_-n - e_-m)
//! X_L2  =  sum_{n=1..L} sum_{m=L+1..L+D}    |V_{-m,-n}|² / (e_-n - e_-m)
//! ```
//!
//! Hole theory sums all three; field theory over the filled sea keeps only
//! `Y_L`; field theory over the band vacuum gives `Y_L + X_L2`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::Basis;
use crate::elements::{build_table, IndexWindow, MatrixElementTable};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::PanelQuadrature;
use crate::sum::CompensatedSum;

/// How far each "infinite" sum is carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Truncation {
    /// Depth of the occupied negative band.
    pub l: usize,
    /// Cutoff of inner sums over positive levels.
    pub m_inner: usize,
    /// Empty negative levels kept below the band.
    pub depth: usize,
}

impl Truncation {
    pub fn new(l: usize, m_inner: usize, depth: usize) -> Result<Self> {
        let t = Self { l, m_inner, depth };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.m_inner == 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "truncation needs L >= 1 and M_inner >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Default depth: the deepest kept level is at least three times as
    /// deep as the bottom of the band.
    pub fn default_depth(basis: &Basis, l: usize) -> Option<usize> {
        let bottom = basis.energy(-(l as i32))?.abs();
        (l..=basis.n_max()).find(|&d| basis.energy(-(d as i32)).is_some_and(|e| e.abs() >= 3.0 * bottom)).map(|d| d - l)
    }

    pub fn window(&self) -> IndexWindow {
        IndexWindow::for_vacuum(self.l, self.m_inner, self.depth)
    }

    pub fn deepest(&self) -> usize {
        self.l + self.depth
    }
}

/// Perturbative shift of one level.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftResult {
    pub n: i32,
    pub first_order: f64,
    pub second_order: f64,
    pub m_inner: usize,
}

/// `V_{n,n}`. The imaginary part must vanish to 1e-10.
pub fn first_order_shift(table: &MatrixElementTable, n: i32) -> Result<f64> {
    let v = table.try_get(n, n)?;
    if v.im.abs() >= 1e-10 {
        return Err(Error::NonHermitian { n, imag: v.im });
    }
    Ok(v.re)
}

/// `sum_{0<|m|<=M, m!=n} |V_{m,n}|² / (e_n - e_m)`, accumulated in order of
/// ascending `|m|`, negative before positive.
pub fn second_order_shift(table: &MatrixElementTable, n: i32, m_inner: usize) -> Result<f64> {
    let e_n = table.try_energy(n)?;
    let mut acc = CompensatedSum::new();
    for j in 1..=m_inner as i32 {
        for m in [-j, j] {
            if m == n {
                continue;
            }
            let v = table.try_get(m, n)?;
            acc.add(v.norm_sqr() / (e_n - table.try_energy(m)?));
        }
    }
    Ok(acc.value())
}

pub fn level_shift(table: &MatrixElementTable, n: i32, m_inner: usize) -> Result<ShiftResult> {
    Ok(ShiftResult {
        n,
        first_order: first_order_shift(table, n)?,
        second_order: second_order_shift(table, n, m_inner)?,
        m_inner,
    })
}

/// The two routes to a pure-gauge second-order level shift.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClosedFormShift {
    /// Truncated perturbative sum.
    pub direct: f64,
    /// `(i/2) ∫ chi² d/dy(phi_n† sigma_y phi_n) dy`, the completeness-summed form.
    pub via_completeness: f64,
}

/// Single-integral form of the pure-gauge second-order shift. The integrand
/// contains `d/dy(phi_n† sigma_y phi_n)`, evaluated from analytic derivatives.
pub fn completeness_route(basis: &Basis, pot: &Potential, n: i32) -> Result<f64> {
    if !pot.is_pure_gauge() {
        return Err(Error::NotPureGauge);
    }
    let mode = basis.try_mode(n)?;
    let quad = PanelQuadrature::new(16, 1e-10);
    let k = 2.0 * mode.momentum + 2.0 * pot.wavenumber();
    let integral = quad
        .integrate(&pot.segments(), k, |y| {
            let (phi, dphi) = (mode.eval(y), mode.derivative(y));
            let d_current = dphi.dot(&phi.sigma_y()) + phi.dot(&dphi.sigma_y());
            let chi = pot.gauge_function(y).unwrap().0;
            d_current * (chi * chi)
        })
        .map_err(|estimate| Error::Quadrature { m: n, n, estimate })?
        .value;
    Ok((Complex64::new(0.0, 0.5) * integral).re)
}

pub fn second_order_shift_closed_form(basis: &Basis, pot: &Potential, n: i32, m_inner: usize) -> Result<ClosedFormShift> {
    let via_completeness = completeness_route(basis, pot, n)?;
    let window = IndexWindow { rows: IndexWindow::symmetric(m_inner).rows, cols: alloc::vec![n] };
    let table = build_table(basis, pot, window)?;
    Ok(ClosedFormShift { direct: second_order_shift(&table, n, m_inner)?, via_completeness })
}

/// Every vacuum-energy variant at one truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VacuumShiftReport {
    pub truncation: Truncation,
    /// `sum_{n=1..L} V_{-n,-n}`
    pub e1: f64,
    pub y_l: f64,
    /// Pairwise-accumulated, zero up to rounding of `|V|` itself.
    pub x_l1: f64,
    /// Single-pass accumulation of the same terms.
    pub x_l1_raw: f64,
    pub x_l2: f64,
    /// `Y_L + X_L1 + X_L2`
    pub de2_hole: f64,
    /// Field theory over the filled sea: `Y_L`.
    pub de2_qft_standard: f64,
    /// Field theory over the band vacuum, accumulated level by level on its own.
    pub de2_qft_redefined: f64,
    /// Part of `Y_L` from the last octave `M/2 < m <= M`.
    pub y_tail: f64,
    /// Part of `X_L2` from the last octave of the depth.
    pub x_l2_tail: f64,
    /// Sum of `|term|` over every second-order term, the scale for
    /// relative comparisons.
    pub term_scale: f64,
}

impl VacuumShiftReport {
    /// `|Y_L + X_L2| / |Y_L|`, or zero when `Y_L` vanishes.
    pub fn cancellation_ratio(&self) -> f64 {
        if self.y_l == 0.0 {
            0.0
        } else {
            ((self.y_l + self.x_l2) / self.y_l).abs()
        }
    }

    /// `|de2_hole - de2_qft_redefined| / term_scale`.
    pub fn reconciliation_defect(&self) -> f64 {
        if self.term_scale == 0.0 {
            (self.de2_hole - self.de2_qft_redefined).abs()
        } else {
            (self.de2_hole - self.de2_qft_redefined).abs() / self.term_scale
        }
    }
}

fn y_term(table: &MatrixElementTable, m: i32, n: i32) -> Result<f64> {
    // m > 0, n > 0
    let v = table.try_get(m, -n)?;
    let denom = table.try_energy(m)? - table.try_energy(-n)?;
    let term = -v.norm_sqr() / denom;
    if denom.is_nan() || denom <= 0.0 || term > 0.0 {
        return Err(Error::SignViolation { sum: "Y_L", m, n: -n, term });
    }
    Ok(term)
}

fn x_term(table: &MatrixElementTable, m: i32, n: i32) -> Result<f64> {
    // |V_{-m,-n}|² / (e_-n - e_-m)
    let v = table.try_get(-m, -n)?;
    Ok(v.norm_sqr() / (table.try_energy(-n)? - table.try_energy(-m)?))
}

fn x_l2_term(table: &MatrixElementTable, m: i32, n: i32) -> Result<f64> {
    let term = x_term(table, m, n)?;
    if term < 0.0 {
        return Err(Error::SignViolation { sum: "X_L2", m: -m, n: -n, term });
    }
    Ok(term)
}

/// Raw and pairwise accumulation of `X_L1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct XL1Antisymmetry {
    pub raw_sum: f64,
    pub pairwise_sum: f64,
    /// Sum of `|term|`.
    pub abs_total: f64,
}

/// `X_L1` over the `L x L` negative block, summed once in fixed order and
/// once as `term(m, n) + term(n, m)` per unordered pair.
pub fn x_l1_antisymmetry(table: &MatrixElementTable, l: usize) -> Result<XL1Antisymmetry> {
    let l = l as i32;
    let mut raw = CompensatedSum::new();
    for n in 1..=l {
        for m in (1..=l).filter(|&m| m != n) {
            raw.add(x_term(table, m, n)?);
        }
    }
    let mut pairwise = CompensatedSum::new();
    for n in 1..=l {
        for m in n + 1..=l {
            pairwise.add(x_term(table, m, n)? + x_term(table, n, m)?);
        }
    }
    Ok(XL1Antisymmetry { raw_sum: raw.value(), pairwise_sum: pairwise.value(), abs_total: raw.abs_total() })
}

/// Fills every field of [`VacuumShiftReport`]; sign contracts are checked
/// term by term.
pub fn vacuum_shift_report(table: &MatrixElementTable, trunc: Truncation) -> Result<VacuumShiftReport> {
    trunc.validate()?;
    let l = trunc.l as i32;
    let m_inner = trunc.m_inner as i32;
    let deepest = trunc.deepest() as i32;

    let mut e1 = CompensatedSum::new();
    for n in 1..=l {
        e1.add(first_order_shift(table, -n)?);
    }

    let mut y = CompensatedSum::new();
    let mut y_tail = CompensatedSum::new();
    for n in 1..=l {
        for m in 1..=m_inner {
            let t = y_term(table, m, n)?;
            y.add(t);
            if 2 * m > m_inner {
                y_tail.add(t);
            }
        }
    }

    let x1 = x_l1_antisymmetry(table, trunc.l)?;

    let mut x2 = CompensatedSum::new();
    let mut x2_tail = CompensatedSum::new();
    for n in 1..=l {
        for m in l + 1..=deepest {
            let t = x_l2_term(table, m, n)?;
            x2.add(t);
            if 2 * (m - l) > deepest - l {
                x2_tail.add(t);
            }
        }
    }

    // Band-vacuum field theory, level by level.
    let mut redefined = CompensatedSum::new();
    for n in 1..=l {
        for m in 1..=m_inner {
            redefined.add(y_term(table, m, n)?);
        }
        for m in l + 1..=deepest {
            redefined.add(x_l2_term(table, m, n)?);
        }
    }

    let mut hole = CompensatedSum::new();
    hole.add(y.value());
    hole.add(x1.pairwise_sum);
    hole.add(x2.value());

    Ok(VacuumShiftReport {
        truncation: trunc,
        e1: e1.value(),
        y_l: y.value(),
        x_l1: x1.pairwise_sum,
        x_l1_raw: x1.raw_sum,
        x_l2: x2.value(),
        de2_hole: hole.value(),
        de2_qft_standard: y.value(),
        de2_qft_redefined: redefined.value(),
        y_tail: y_tail.value(),
        x_l2_tail: x2_tail.value(),
        term_scale: y.abs_total() + x1.abs_total + x2.abs_total(),
    })
}

/// One row of the summation-order comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderDemoRow {
    pub truncation: Truncation,
    pub y_l: f64,
    pub x_l2: f64,
    /// Limiting procedure: `Y_L + X_L2`.
    pub limiting: f64,
    /// Level by level: `sum_{n=1..L}` of the full inner sum over every kept
    /// `m != -n`.
    pub inner_first: f64,
    /// Split with `X` dropped because swapping dummy indices makes it `-X`.
    pub swapped: f64,
    /// `|Y_L + X_L2| / |Y_L|`
    pub residual_ratio: f64,
}

/// Contrasts the summation orders at each truncation of `sweep`.
pub fn summation_order_demo(table: &MatrixElementTable, sweep: &[Truncation]) -> Result<Vec<OrderDemoRow>> {
    sweep
        .iter()
        .map(|&t| {
            let r = vacuum_shift_report(table, t)?;
            let mut inner_first = CompensatedSum::new();
            for n in 1..=t.l as i32 {
                let e_n = table.try_energy(-n)?;
                let mut level = CompensatedSum::new();
                let others = (1..=t.deepest() as i32).map(|m| -m).chain(1..=t.m_inner as i32);
                for m in others.filter(|&m| m != -n) {
                    let v = table.try_get(m, -n)?;
                    level.add(v.norm_sqr() / (e_n - table.try_energy(m)?));
                }
                inner_first.add(level.value());
            }
            Ok(OrderDemoRow {
                truncation: t,
                y_l: r.y_l,
                x_l2: r.x_l2,
                limiting: r.y_l + r.x_l2,
                inner_first: inner_first.value(),
                swapped: r.y_l,
                residual_ratio: r.cancellation_ratio(),
            })
        })
        .collect()
}
