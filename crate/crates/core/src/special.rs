//! Log-space special functions.
//!
//! Everything that would overflow as a raw count (factorials, binomials,
//! sums of importance weights) is evaluated as a natural logarithm.

use crate::error::{Error, Result};
use crate::math;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Below this argument the Stirling series is not used directly; the
/// argument is shifted upwards with the recurrence first.
const STIRLING_MIN: f64 = 15.0;

/// Exact factorials that fit in a `u64`.
const FACTORIALS: [u64; 21] = {
    let mut table = [1u64; 21];
    let mut i = 1;
    while i < 21 {
        table[i] = table[i - 1] * i as u64;
        i += 1;
    }
    table
};

/// Tail of the Stirling series for ln Γ(z), i.e. everything after
/// `(z - 1/2) ln z - z + ln sqrt(2π)`.
fn stirling_tail(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0
        - inv2
            * (1.0 / 360.0
                - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))))
}

fn ln_gamma_stirling(z: f64) -> f64 {
    (z - 0.5) * math::ln(z) - z + LN_SQRT_2PI + stirling_tail(z)
}

/// ln Γ(x) for x > 0 without argument checks.
pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 21.0 && x == math::floor(x) {
        return math::ln(FACTORIALS[x as usize - 1] as f64);
    }
    if x >= STIRLING_MIN {
        return ln_gamma_stirling(x);
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < STIRLING_MIN {
        prod *= z;
        z += 1.0;
    }
    ln_gamma_stirling(z) - math::ln(prod)
}

/// Natural log of the gamma function for positive arguments.
///
/// Accurate to roughly 1e-15 relative away from the zeros of ln Γ at 1 and 2.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(x));
    }
    Ok(ln_gamma_pos(x))
}

/// ln |Γ(x)| for any real x that is not a pole (0, -1, -2, ...).
pub fn ln_abs_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(x));
    }
    if x > 0.0 {
        return Ok(ln_gamma_pos(x));
    }
    if x == math::floor(x) {
        return Err(Error::GammaPole(x));
    }
    // Reflection: Γ(x) Γ(1 - x) = π / sin(πx).
    let s = math::sin(core::f64::consts::PI * x).abs();
    Ok(LN_PI - math::ln(s) - ln_gamma_pos(1.0 - x))
}

/// ln Γ(x + k) - ln Γ(x) for x > 0 and x + k > 0, free of the cancellation
/// that the direct difference suffers once x is much larger than |k|.
pub(crate) fn ln_gamma_diff(x: f64, k: f64) -> f64 {
    debug_assert!(x > 0.0 && x + k > 0.0);
    if k == 0.0 {
        return 0.0;
    }
    if x < STIRLING_MIN || x + k < STIRLING_MIN {
        return ln_gamma_pos(x + k) - ln_gamma_pos(x);
    }
    let y = x + k;
    (x - 0.5) * math::ln_1p(k / x) + k * math::ln(y) - k + (stirling_tail(y) - stirling_tail(x))
}

/// ln n! for a non-negative integer.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= 20 {
        math::ln(FACTORIALS[n as usize] as f64)
    } else {
        ln_gamma_pos(n as f64 + 1.0)
    }
}

/// Natural log of the real binomial coefficient
/// `Γ(a + 1) / (Γ(b + 1) Γ(a - b + 1))`.
///
/// Needs `b > -1` and `a - b > -1`. The evaluation goes through
/// [`ln_gamma_diff`] on the larger of `b` and `a - b`, so it stays
/// accurate when one of them is huge (the effective-columns estimate
/// routinely evaluates binomials with a top argument near 1e15).
pub fn ln_gbinom(a: f64, b: f64) -> Result<f64> {
    let rest = a - b;
    if !(b > -1.0) || !b.is_finite() {
        return Err(Error::Domain(b));
    }
    if !(rest > -1.0) || !rest.is_finite() {
        return Err(Error::Domain(a));
    }
    let (big, small) = if b >= rest { (b, rest) } else { (rest, b) };
    Ok(ln_gamma_diff(big + 1.0, small) - ln_gamma_pos(small + 1.0))
}

/// ln |C(alpha, k)| for real `alpha` and integer `k`, using the falling
/// factorial definition `alpha (alpha - 1) ... (alpha - k + 1) / k!`, which
/// is defined (and may be negative or zero) for every real `alpha`.
///
/// Returns `-inf` when the coefficient is exactly zero.
pub fn ln_abs_binom(alpha: f64, k: u64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::Domain(alpha));
    }
    let kf = k as f64;
    if k == 0 {
        return Ok(0.0);
    }
    if alpha - kf > -1.0 {
        return ln_gbinom(alpha, kf);
    }
    if alpha < 0.0 {
        // C(alpha, k) = (-1)^k C(k - alpha - 1, k)
        return ln_gbinom(kf - alpha - 1.0, kf);
    }
    if alpha == math::floor(alpha) {
        // Non-negative integer below k: one factor of the product is zero.
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_gamma_pos(alpha + 1.0) - ln_factorial(k) - ln_abs_gamma(alpha - kf + 1.0)?)
}

/// Stable `ln Σ exp(x_i)`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| math::exp(v - max)).sum();
    max + math::ln(sum)
}
