//! Static external potentials `V(y) = -sigma_y A_y(y) + A_0(y)`.
//!
//! A pure-gauge potential is generated by a function `chi` vanishing at both
//! walls: `A_0 = 0`, `A_y = -chi'`. Its electric field vanishes identically
//! since nothing depends on time and `A_0 = 0`. All derivatives of `chi` are
//! analytic.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{apply_h0, Basis, BoxParams, Spinor};
use crate::error::{Error, Result};

/// Families of gauge functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChiFamily {
    /// `sum_j c_j sin(j pi (y + a) / (2a))`, j from 1.
    SineSeries,
    /// `(1 - (y/a)^2) * sum_i c_i (y/a)^i`.
    BumpPolynomial,
    /// `sum_i c_i (y/a)^i` with no wall factor. Only accepted when it
    /// happens to vanish at both walls.
    RawPolynomial,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChiSpec {
    pub family: ChiFamily,
    pub coefficients: Vec<f64>,
}

impl ChiSpec {
    pub fn sine_series(coefficients: impl Into<Vec<f64>>) -> Self {
        Self { family: ChiFamily::SineSeries, coefficients: coefficients.into() }
    }

    pub fn bump_polynomial(coefficients: impl Into<Vec<f64>>) -> Self {
        Self { family: ChiFamily::BumpPolynomial, coefficients: coefficients.into() }
    }

    pub fn raw_polynomial(coefficients: impl Into<Vec<f64>>) -> Self {
        Self { family: ChiFamily::RawPolynomial, coefficients: coefficients.into() }
    }
}

/// Polynomial value and derivative by Horner's rule.
fn poly(c: &[f64], t: f64) -> (f64, f64) {
    c.iter().rev().fold((0.0, 0.0), |(p, dp), &ci| (p * t + ci, dp * t + p))
}

/// A gauge function bound to a box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chi {
    spec: ChiSpec,
    a: f64,
}

impl Chi {
    pub fn spec(&self) -> &ChiSpec {
        &self.spec
    }

    pub fn value(&self, y: f64) -> f64 {
        self.value_and_derivative(y).0
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.value_and_derivative(y).1
    }

    pub fn value_and_derivative(&self, y: f64) -> (f64, f64) {
        let a = self.a;
        let c = &self.spec.coefficients;
        match self.spec.family {
            ChiFamily::SineSeries => {
                let q = PI / (2.0 * a);
                c.iter().enumerate().fold((0.0, 0.0), |(v, d), (j, &cj)| {
                    let w = (j + 1) as f64 * q;
                    let (s, co) = (w * (y + a)).sin_cos();
                    (v + cj * s, d + cj * w * co)
                })
            }
            ChiFamily::BumpPolynomial => {
                let t = y / a;
                let (p, dp) = poly(c, t);
                let v = (1.0 - t * t) * p;
                let d = (-2.0 * t * p + (1.0 - t * t) * dp) / a;
                (v, d)
            }
            ChiFamily::RawPolynomial => {
                let (p, dp) = poly(c, y / a);
                (p, dp / a)
            }
        }
    }

    /// Highest wavenumber present, used to size quadrature panels.
    pub fn wavenumber(&self) -> f64 {
        match self.spec.family {
            ChiFamily::SineSeries => self.spec.coefficients.len() as f64 * PI / (2.0 * self.a),
            _ => (self.spec.coefficients.len() as f64 + 2.0) / self.a,
        }
    }
}

/// Closed-form scalar profiles for general potentials.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum Profile {
    Zero,
    Constant { value: f64 },
    /// `value` on `|y| < half_width`, zero elsewhere.
    Step { value: f64, half_width: f64 },
    /// `sum_i c_i (y/a)^i`.
    Polynomial { coefficients: Vec<f64> },
    /// `amplitude * cos(wavenumber * y + phase)`.
    Cosine { amplitude: f64, wavenumber: f64, phase: f64 },
}

impl Profile {
    fn eval(&self, y: f64, a: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Step { value, half_width } => {
                if y.abs() < *half_width {
                    *value
                } else {
                    0.0
                }
            }
            Profile::Polynomial { coefficients } => poly(coefficients, y / a).0,
            Profile::Cosine { amplitude, wavenumber, phase } => amplitude * (wavenumber * y + phase).cos(),
        }
    }

    fn breakpoints(&self, a: f64) -> Vec<f64> {
        match self {
            Profile::Step { half_width, .. } if *half_width < a => alloc::vec![-half_width, *half_width],
            _ => Vec::new(),
        }
    }

    fn wavenumber(&self, a: f64) -> f64 {
        match self {
            Profile::Polynomial { coefficients } => coefficients.len() as f64 / a,
            Profile::Cosine { wavenumber, .. } => wavenumber.abs(),
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile::Zero => true,
            Profile::Constant { value } => value.is_finite(),
            Profile::Step { value, half_width } => value.is_finite() && half_width.is_finite() && *half_width > 0.0,
            Profile::Polynomial { coefficients } => coefficients.iter().all(|c| c.is_finite()),
            Profile::Cosine { amplitude, wavenumber, phase } => {
                amplitude.is_finite() && wavenumber.is_finite() && phase.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!("invalid profile {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    General { a0: Profile, ay: Profile },
    PureGauge(Chi),
}

/// `V = scale * (-sigma_y A_y + A_0)` on `[-a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    scale: f64,
    a: f64,
}

/// Builds the pure-gauge potential `A_0 = 0`, `A_y = -chi'`.
pub fn make_gauge_potential(spec: ChiSpec, params: &BoxParams) -> Result<Potential> {
    params.validate()?;
    if spec.coefficients.is_empty() {
        return Err(Error::InvalidParameter("gauge function needs at least one coefficient".into()));
    }
    if spec.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("gauge coefficients must be finite".into()));
    }
    let chi = Chi { spec, a: params.a };
    let left = chi.value(-params.a);
    let right = chi.value(params.a);
    let tol = 1e-12 * (1.0 + chi.spec.coefficients.iter().map(|c| c.abs()).sum::<f64>());
    if left.abs() > tol || right.abs() > tol {
        return Err(Error::BoundaryViolation { left, right });
    }
    Ok(Potential { kind: PotentialKind::PureGauge(chi), scale: 1.0, a: params.a })
}

impl Potential {
    pub fn general(a0: Profile, ay: Profile, params: &BoxParams) -> Result<Self> {
        params.validate()?;
        a0.validate()?;
        ay.validate()?;
        Ok(Self { kind: PotentialKind::General { a0, ay }, scale: 1.0, a: params.a })
    }

    pub fn zero(params: &BoxParams) -> Self {
        Self { kind: PotentialKind::General { a0: Profile::Zero, ay: Profile::Zero }, scale: 1.0, a: params.a }
    }

    /// `A_0 = value` on `|y| < half_width`.
    pub fn step_well(value: f64, half_width: f64, params: &BoxParams) -> Result<Self> {
        Self::general(Profile::Step { value, half_width }, Profile::Zero, params)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same shape with every field multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { kind: self.kind.clone(), scale: self.scale * lambda, a: self.a }
    }

    pub fn is_pure_gauge(&self) -> bool {
        matches!(self.kind, PotentialKind::PureGauge(_))
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
            || match &self.kind {
                PotentialKind::General { a0, ay } => *a0 == Profile::Zero && *ay == Profile::Zero,
                PotentialKind::PureGauge(chi) => chi.spec.coefficients.iter().all(|&c| c == 0.0),
            }
    }

    pub fn chi(&self) -> Option<&Chi> {
        match &self.kind {
            PotentialKind::PureGauge(chi) => Some(chi),
            _ => None,
        }
    }

    /// Scaled `chi` and `chi'` of a pure-gauge potential.
    pub fn gauge_function(&self, y: f64) -> Option<(f64, f64)> {
        self.chi().map(|chi| {
            let (v, d) = chi.value_and_derivative(y);
            (self.scale * v, self.scale * d)
        })
    }

    pub fn a0(&self, y: f64) -> f64 {
        match &self.kind {
            PotentialKind::General { a0, .. } => self.scale * a0.eval(y, self.a),
            PotentialKind::PureGauge(_) => 0.0,
        }
    }

    pub fn ay(&self, y: f64) -> f64 {
        match &self.kind {
            PotentialKind::General { ay, .. } => self.scale * ay.eval(y, self.a),
            PotentialKind::PureGauge(chi) => -self.scale * chi.derivative(y),
        }
    }

    /// `V(y)` as a 2x2 matrix, row major.
    pub fn matrix(&self, y: f64) -> [[Complex64; 2]; 2] {
        let a0 = Complex64::new(self.a0(y), 0.0);
        let ay = self.ay(y);
        // -sigma_y A_y = [[0, i A_y], [-i A_y, 0]]
        [[a0, Complex64::new(0.0, ay)], [Complex64::new(0.0, -ay), a0]]
    }

    pub fn apply(&self, y: f64, psi: Spinor) -> Spinor {
        let v = self.matrix(y);
        Spinor {
            upper: v[0][0] * psi.upper + v[0][1] * psi.lower,
            lower: v[1][0] * psi.upper + v[1][1] * psi.lower,
        }
    }

    /// Integration segments of `[-a, a]` split at discontinuities.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        let mut cuts = alloc::vec![-self.a];
        if let PotentialKind::General { a0, ay } = &self.kind {
            let mut inner: Vec<f64> = a0.breakpoints(self.a);
            inner.extend(ay.breakpoints(self.a));
            inner.retain(|&x| x > -self.a && x < self.a);
            inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
            inner.dedup();
            cuts.extend(inner);
        }
        cuts.push(self.a);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Highest wavenumber carried by the potential itself.
    pub fn wavenumber(&self) -> f64 {
        match &self.kind {
            PotentialKind::General { a0, ay } => a0.wavenumber(self.a).max(ay.wavenumber(self.a)),
            PotentialKind::PureGauge(chi) => chi.wavenumber(),
        }
    }

    /// Largest `|V - V†|` entry over `points` samples.
    pub fn hermiticity_defect(&self, points: usize) -> f64 {
        crate::basis::uniform_grid(self.a, points)
            .into_iter()
            .map(|y| {
                let v = self.matrix(y);
                (0..4).map(|k| (v[k / 2][k % 2] - v[k % 2][k / 2].conj()).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|A_y + chi'|` over `points` samples; `None` for general potentials.
    pub fn gauge_consistency_defect(&self, points: usize) -> Option<f64> {
        self.chi()?;
        Some(
            crate::basis::uniform_grid(self.a, points)
                .into_iter()
                .map(|y| (self.ay(y) + self.gauge_function(y).unwrap().1).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Largest pointwise `|(H0 + V) psi - eps psi|` for `psi = exp(-i chi) phi_n`
/// over `points` samples of `[-a, a]`.
pub fn exact_gauge_solution_residual(basis: &Basis, pot: &Potential, n: i32, points: usize) -> Result<f64> {
    if !pot.is_pure_gauge() {
        return Err(Error::NotPureGauge);
    }
    let mode = basis.try_mode(n)?;
    let mass = basis.params().m;
    let residual = crate::basis::uniform_grid(basis.params().a, points)
        .into_iter()
        .map(|y| {
            let (chi, dchi) = pot.gauge_function(y).unwrap();
            let phase = Complex64::new(0.0, -chi).exp();
            let phi = mode.eval(y);
            let psi = phi * phase;
            let dpsi = (mode.derivative(y) - phi * Complex64::new(0.0, dchi)) * phase;
            let lhs = apply_h0(mass, psi, dpsi) + pot.apply(y, psi);
            (lhs - psi * mode.energy).norm()
        })
        .fold(0.0, f64::max);
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;

    fn unit() -> BoxParams {
        BoxParams::default()
    }

    #[test]
    fn zero_coefficients_give_zero_field() {
        let p = make_gauge_potential(ChiSpec::sine_series([0.0]), &unit()).unwrap();
        assert!(p.is_zero());
        for y in [-1.0, 0.0, 0.5] {
            assert_eq!(p.ay(y), 0.0);
            assert_eq!(p.matrix(y)[0][1], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn sine_derivative_is_analytic() {
        let lam = 1.7;
        let p = make_gauge_potential(ChiSpec::sine_series([lam]), &unit()).unwrap();
        for y in [-0.9, -0.1, 0.4, 0.99] {
            let expect = -lam * (PI / 2.0) * (PI * (y + 1.0) / 2.0).cos();
            assert!((p.ay(y) - expect).abs() < 1e-14);
        }
        let chi = p.chi().unwrap();
        assert!(chi.value(-1.0).abs() < 1e-15 && chi.value(1.0).abs() < 1e-15);
    }

    #[test]
    fn bump_gives_linear_field() {
        let p = make_gauge_potential(ChiSpec::bump_polynomial([1.0]), &unit()).unwrap();
        for y in [-0.7, 0.0, 0.3] {
            assert!((p.chi().unwrap().value(y) - (1.0 - y * y)).abs() < 1e-15);
            assert!((p.ay(y) - 2.0 * y).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_and_unpinned_specs_are_rejected() {
        assert!(matches!(
            make_gauge_potential(ChiSpec::sine_series(Vec::new()), &unit()),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_gauge_potential(ChiSpec::raw_polynomial([0.5, 1.0]), &unit()),
            Err(Error::BoundaryViolation { .. })
        ));
        // 1 - t^2 written out is allowed through the raw family.
        assert!(make_gauge_potential(ChiSpec::raw_polynomial([1.0, 0.0, -1.0]), &unit()).is_ok());
    }

    #[test]
    fn fields_are_hermitian_and_consistent() {
        let p = make_gauge_potential(ChiSpec::sine_series([0.3, -1.0, 0.2]), &unit()).unwrap();
        assert_eq!(p.hermiticity_defect(50), 0.0);
        assert!(p.gauge_consistency_defect(200).unwrap() < 1e-12);
        let w = Potential::step_well(-1.0, 0.5, &unit()).unwrap();
        assert_eq!(w.hermiticity_defect(50), 0.0);
        assert!(w.gauge_consistency_defect(10).is_none());
        assert_eq!(w.segments(), alloc::vec![(-1.0, -0.5), (-0.5, 0.5), (0.5, 1.0)]);
    }

    #[test]
    fn gauge_residual_vanishes() {
        let b = build_basis(unit(), 4).unwrap();
        let zero = make_gauge_potential(ChiSpec::sine_series([0.0]), &unit()).unwrap();
        // identity transform: only the bare mode's roundoff remains
        assert!(exact_gauge_solution_residual(&b, &zero, 2, 50).unwrap() < 1e-13);
        let p1 = make_gauge_potential(ChiSpec::sine_series([1.0]), &unit()).unwrap();
        let p5 = make_gauge_potential(ChiSpec::sine_series([5.0]), &unit()).unwrap();
        let r1 = exact_gauge_solution_residual(&b, &p1, 1, 201).unwrap();
        let r5 = exact_gauge_solution_residual(&b, &p5, -2, 201).unwrap();
        assert!(r1 < 1e-8 && r5 < 1e-8, "{r1} {r5}");
    }

    #[test]
    fn general_potential_is_rejected_by_gauge_oracle() {
        let b = build_basis(unit(), 2).unwrap();
        let w = Potential::step_well(-1.0, 0.5, &unit()).unwrap();
        assert_eq!(exact_gauge_solution_residual(&b, &w, 1, 10), Err(Error::NotPureGauge));
    }
}
