use alloc::string::String;

/// Everything that can go wrong while building or evaluating the model.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no dispersion root bracketed for mode {index}")]
    RootNotBracketed { index: i32 },

    #[error("root finder did not converge for mode {index}")]
    RootNotConverged { index: i32 },

    #[error("degenerate levels {m} and {n} (gap {gap:e})")]
    Degenerate { m: i32, n: i32, gap: f64 },

    #[error("ambiguous lattice match for mode {index}: {count} eigenvalues in window")]
    AmbiguousMatch { index: i32, count: usize },

    #[error("mode {0} is not in the basis")]
    MissingMode(i32),

    #[error("quadrature did not converge for ({m}, {n}); last error estimate {estimate:e}")]
    Quadrature { m: i32, n: i32, estimate: f64 },

    #[error("potential is not a pure gauge")]
    NotPureGauge,

    #[error("gauge function does not vanish at the walls: chi(-a) = {left:e}, chi(a) = {right:e}")]
    BoundaryViolation { left: f64, right: f64 },

    #[error("diagonal element ({n}, {n}) has imaginary part {imag:e}")]
    NonHermitian { n: i32, imag: f64 },

    #[error("matrix element ({m}, {n}) missing from table")]
    MissingElement { m: i32, n: i32 },

    #[error("sign contract violated in {sum} at (m = {m}, n = {n}): term {term:e}")]
    SignViolation { sum: &'static str, m: i32, n: i32, term: f64 },

    #[error("mode window of {0} modes exceeds the exact-diagonalization bound")]
    WindowTooLarge(usize),

    #[error("perturbation too strong for adiabatic identification (overlap {0:.3})")]
    WeakOverlap(f64),

    #[error("vanishing energy denominator for many-body state {0:#b}")]
    VanishingDenominator(u32),
}

pub type Result<T> = core::result::Result<T, Error>;
