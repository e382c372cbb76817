//! Reference values computed without the Gauss iteration under test.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

/// `∫₀^{π/2} dθ / √(a² cos²θ + b² sin²θ)` by the trapezoidal rule.
///
/// The integrand extends to a smooth π-periodic even function, so the
/// trapezoidal rule on `[0, π/2]` converges geometrically in `panels`.
pub fn elliptic_quarter_period(a: f64, b: f64, panels: usize) -> f64 {
    let h = FRAC_PI_2 / panels as f64;
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        1.0 / (a * a * c * c + b * b * s * s).sqrt()
    };
    let interior: f64 = (1..panels).map(|k| f(k as f64 * h)).sum();
    h * (0.5 * f(0.0) + interior + 0.5 * f(FRAC_PI_2))
}

/// Doubles the panel count until two successive estimates agree to 1e-15.
pub fn elliptic_quarter_period_converged(a: f64, b: f64) -> f64 {
    let mut panels = 64;
    let mut previous = elliptic_quarter_period(a, b, panels);
    loop {
        panels *= 2;
        let next = elliptic_quarter_period(a, b, panels);
        if (next - previous).abs() <= 1e-15 * next || panels >= 1 << 20 {
            return next;
        }
        previous = next;
    }
}

/// `AGM(a, b) = π / (2 I(a, b))`.
pub fn agm_by_quadrature(a: f64, b: f64) -> f64 {
    std::f64::consts::PI / (2.0 * elliptic_quarter_period_converged(a, b))
}

/// Invariant mean of the shift-average mapping on three coordinates.
///
/// `K(v) = a v1 + b v2 + c v3` must satisfy `K(v2, v3, (v1+v2+v3)/3) = K(v)`:
/// matching coefficients gives `a = c/3`, `b = a + c/3`, `c = b + c/3`, and
/// `a + b + c = 1` fixes `(a, b, c) = (1/6, 1/3, 1/2)`.
pub fn shift3_invariant(v: &[f64]) -> f64 {
    v[0] / 6.0 + v[1] / 3.0 + v[2] / 2.0
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
