//! Bracketing root finder for scalar transcendental equations.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Walks `[start, start + step, ...]` and records every sign change of `f`
/// until `wanted` brackets are found or `max_steps` intervals were checked.
pub fn scan_brackets<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    step: f64,
    wanted: usize,
    max_steps: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(wanted.min(max_steps));
    let mut lo = start;
    let mut f_lo = f(lo);
    for i in 1..=max_steps {
        if out.len() == wanted {
            break;
        }
        let hi = start + step * i as f64;
        let f_hi = f(hi);
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            out.push((lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
    }
    out
}

/// Safeguarded secant iteration inside a sign-change bracket.
///
/// Takes a regula-falsi step when it lands well inside the bracket and
/// shrinks it by at least half; otherwise bisects. Returns `None` if the
/// input is not a bracket or the iteration budget runs out.
pub fn refine<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..200 {
        let width = hi - lo;
        if width <= xtol {
            return Some(0.5 * (lo + hi));
        }
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let margin = 0.05 * width;
        let x = if secant > lo + margin && secant < hi - margin { secant } else { 0.5 * (lo + hi) };
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        // Secant steps that stall on one side get one forced bisection.
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 {
                return Some(mid);
            }
            if fm.signum() == f_lo.signum() {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
    }
    None
}
