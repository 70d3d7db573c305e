use std::f64::consts::PI;

use crate::phase::{SUP_SAFETY, SUP_SAMPLES};
use crate::quadrature::adaptive_simpson;

/// Reference-integral tolerance.
pub const REFERENCE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapezoidError {
    /// `int_0^{2pi} f - dtheta sum_m f(theta_m)`.
    pub error: f64,
    /// `(pi/12) sup|f''| dtheta^2`.
    pub bound: f64,
    pub integral: f64,
    pub sum: f64,
}

/// Dense-sampled `sup |f|` over one period, inflated by the usual safety factor.
pub fn periodic_sup(f: &dyn Fn(f64) -> f64) -> f64 {
    let max = (0..SUP_SAMPLES)
        .map(|k| f(2.0 * PI * k as f64 / SUP_SAMPLES as f64).abs())
        .fold(0.0, f64::max);
    SUP_SAFETY * max
}

/// Signed error of the `m`-point periodic trapezoid rule and its bound,
/// given `sup |f''|`.
pub fn trapezoid_error(f: &dyn Fn(f64) -> f64, d2_sup: f64, m: usize) -> TrapezoidError {
    let dtheta = 2.0 * PI / m as f64;
    let sum = dtheta * (0..m).map(|k| f(k as f64 * dtheta)).sum::<f64>();
    let integral = adaptive_simpson(f, 0.0, 2.0 * PI, REFERENCE_TOL);
    TrapezoidError {
        error: integral - sum,
        bound: PI / 12.0 * d2_sup * dtheta * dtheta,
        integral,
        sum,
    }
}

/// `4 pi C r^M / (1 - r^M)`.
pub fn analytic_kernel_bound(c: f64, r: f64, m: usize) -> f64 {
    let rm = r.powi(m as i32);
    4.0 * PI * c * rm / (1.0 - rm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_harmonic_is_exact() {
        let e = trapezoid_error(&|t: f64| t.cos(), 1.0, 8);
        assert!(e.error.abs() < 1e-13);
    }

    #[test]
    fn aliased_harmonic() {
        let e = trapezoid_error(&|t: f64| (8.0 * t).cos(), 64.0, 8);
        assert!((e.error + 2.0 * PI).abs() < 1e-12);
        assert!((e.bound - PI.powi(3) / 3.0).abs() < 1e-12);
        assert!(e.error.abs() <= e.bound);
    }
}
