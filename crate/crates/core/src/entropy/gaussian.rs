//! Gaussian helpers shared by the skip rule, the coder and rate accounting.
//!
//! Everything here evaluates in `f64` through `libm`, which is a software
//! implementation, so CDF tables come out identical on every platform.

use std::f64::consts::SQRT_2;

/// Smallest probability any coded symbol is charged for.
pub const PROB_FLOOR: f64 = 1.0 / 65536.0;

/// Standard normal CDF.
#[inline]
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Mode and central mass of `N(mu, sigma)`.
///
/// The density peaks at `mu`; the mass within half a quantization bin of the
/// peak is `erf(1 / (2 * sqrt(2) * sigma))`, independent of `mu`.
pub fn mode_and_mass(mu: f64, sigma: f64) -> (f64, f64) {
    (mu, libm::erf(1.0 / (2.0 * SQRT_2 * sigma)))
}

/// Inverse of the central mass: the scale whose central mass equals `q`.
/// Solved by bisection, `q` in (0, 1).
pub fn sigma_for_mass(q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0, "central mass must lie in (0, 1)");
    let (mut lo, mut hi) = (1e-6f64, 1e6f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mode_and_mass(0.0, mid).1 > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Mass of `N(mu, sigma)` on the integer bin `[v - 0.5, v + 0.5]`.
pub fn bin_mass(v: f64, mu: f64, sigma: f64) -> f64 {
    let lo = (v - 0.5 - mu) / sigma;
    let hi = (v + 0.5 - mu) / sigma;
    // Use the tail that keeps both CDF values small to avoid cancellation.
    let m = if lo > 0.0 {
        phi(-lo) - phi(-hi)
    } else {
        phi(hi) - phi(lo)
    };
    m.max(0.0)
}

/// Ideal code length in bits for symbol `v`, probability floored at 2^-16.
pub fn symbol_cost(v: f64, mu: f64, sigma: f64) -> f64 {
    -bin_mass(v, mu, sigma).max(PROB_FLOOR).log2()
}
