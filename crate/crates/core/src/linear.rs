//! Closed-form O(m + n) estimates of the number of matrices.
//!
//! The first group counts non-negative integer matrices; the functions with
//! a `0` suffix count 0-1 matrices and return a zero count (`-inf`) for
//! margins that fail the Gale-Ryser test.

use crate::error::{Error, Result};
use crate::estimate::{LogCount, Method};
use crate::exact::gale_ryser_feasible;
use crate::margins::Margins;
use crate::math;
use crate::special::{ln_abs_binom, ln_factorial, ln_gamma, ln_gbinom};

/// Regularizer added to `c² - N`; keeps the effective column count finite
/// when every column sum is one.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// The fitted number of effective columns `α_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveColumns {
    pub alpha: f64,
    pub epsilon: f64,
}

/// `α_c^(0)` for the 0-1 estimate. Unlike `α_c` it can be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOneEffectiveColumns {
    pub alpha0: f64,
    pub epsilon: f64,
}

fn lbinom(a: f64, b: f64) -> f64 {
    let v = ln_gbinom(a, b);
    debug_assert!(v.is_ok(), "binomial ({a}, {b}) outside domain");
    v.unwrap_or(f64::NAN)
}

/// `Σ_j ln C(c_j + m - 1, m - 1)`, the log size of the set of matrices with
/// column sums `c` and free row sums.
fn ln_free_rows(cols: &[u64], m: usize) -> f64 {
    let m1 = m as f64 - 1.0;
    cols.iter().map(|&c| lbinom(c as f64 + m1, m1)).sum()
}

/// ln of the Dirichlet-multinomial probability of the row sums under `alpha`
/// effective columns (without the column factor).
fn ln_row_probability(margins: &Margins, alpha: f64) -> f64 {
    let n_total = margins.total() as f64;
    let m_alpha = margins.m() as f64 * alpha;
    let rows: f64 = margins
        .rows()
        .iter()
        .map(|&r| lbinom(r as f64 + alpha - 1.0, alpha - 1.0))
        .sum();
    rows - lbinom(n_total + m_alpha - 1.0, m_alpha - 1.0)
}

/// `ln (n! / Π r_i!)`, the exact count when every column sum is one.
fn ln_unit_columns_count(margins: &Margins) -> f64 {
    ln_factorial(margins.total()) - margins.rows().iter().map(|&r| ln_factorial(r)).sum::<f64>()
}

fn ln_multinomial(margins: &Margins) -> f64 {
    ln_factorial(margins.total())
        - margins.rows().iter().map(|&r| ln_factorial(r)).sum::<f64>()
        - margins.cols().iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

pub fn alpha_c(margins: &Margins) -> EffectiveColumns {
    alpha_c_with_epsilon(margins, DEFAULT_EPSILON)
}

/// `α_c = (N² - N + (N² - c²)/m) / (c² - N + ε)`
pub fn alpha_c_with_epsilon(margins: &Margins, epsilon: f64) -> EffectiveColumns {
    let alpha = effective_columns(margins.total(), margins.c2(), margins.m(), epsilon);
    EffectiveColumns { alpha, epsilon }
}

/// `α_c` from the raw aggregates: total `N`, `c² = Σ c_j²` and row count `m`.
pub fn effective_columns(total: u64, c2: u128, m: usize, epsilon: f64) -> f64 {
    let n = total as f64;
    let c2 = c2 as f64;
    (n * n - n + (n * n - c2) / m as f64) / (c2 - n + epsilon)
}

/// Effective-columns estimate.
pub fn ec(margins: &Margins) -> LogCount {
    if margins.all_cols_one() {
        return LogCount::point(Method::Ec, ln_unit_columns_count(margins));
    }
    let alpha = alpha_c(margins).alpha;
    let value = ln_row_probability(margins, alpha) + ln_free_rows(margins.cols(), margins.m());
    LogCount::point(Method::Ec, value)
}

/// Average of the effective-columns estimate over both orientations.
pub fn ec_symmetrized(margins: &Margins) -> LogCount {
    let forward = ec(margins).ln_omega;
    let backward = ec(&margins.transposed()).ln_omega;
    LogCount::point(Method::EcSym, 0.5 * (forward + backward))
}

/// Good and Crook: the effective-columns form with `α = n`.
pub fn gc(margins: &Margins) -> LogCount {
    let value = ln_row_probability(margins, margins.n() as f64) + ln_free_rows(margins.cols(), margins.m());
    LogCount::point(Method::Gc, value)
}

/// Gail and Mantel's multinormal moment-matching estimate.
pub fn gm(margins: &Margins) -> LogCount {
    let m = margins.m() as f64;
    let n_total = margins.total() as f64;
    let free = ln_free_rows(margins.cols(), margins.m());
    if margins.m() == 1 {
        return LogCount::point(Method::Gm, free);
    }
    let c2 = margins.c2() as f64;
    let r2 = margins.r2() as f64;
    let sigma2 = (c2 + m * n_total) * (m - 1.0) / ((m + 1.0) * m * m);
    let q = (m - 1.0) / (sigma2 * m) * (r2 - n_total * n_total / m);
    let value = 0.5 * (m - 1.0) * math::ln((m - 1.0) / (2.0 * core::f64::consts::PI * m * sigma2))
        + 0.5 * math::ln(m)
        - 0.5 * q
        + free;
    LogCount::point(Method::Gm, value)
}

/// Diaconis and Efron's polytope-volume estimate.
pub fn de(margins: &Margins) -> Result<LogCount> {
    let m = margins.m() as f64;
    let n = margins.n() as f64;
    let n_total = margins.total() as f64;
    let w = n_total / (n_total + 0.5 * m * n);
    let r_bar = |r: u64| (1.0 - w) / m + w * r as f64 / n_total;
    let c_bar = |c: u64| (1.0 - w) / n + w * c as f64 / n_total;
    let c_bar2: f64 = margins.cols().iter().map(|&c| c_bar(c) * c_bar(c)).sum();
    let k = (m + 1.0) / (m * c_bar2) - 1.0 / m;
    if !(k > 0.0) {
        return Err(Error::DegenerateK(k));
    }
    let ln_r: f64 = margins.rows().iter().map(|&r| math::ln(r_bar(r))).sum();
    let ln_c: f64 = margins.cols().iter().map(|&c| math::ln(c_bar(c))).sum();
    let value = (m - 1.0) * (n - 1.0) * math::ln(n_total + 0.5 * m * n)
        + (k - 1.0) * ln_r
        + (m - 1.0) * ln_c
        + ln_gamma(m * k)?
        - n * ln_gamma(m)?
        - m * ln_gamma(k)?;
    Ok(LogCount::point(Method::De, value))
}

/// Békéssy, Békéssy and Komlós sparse-regime estimate.
pub fn bbk(margins: &Margins) -> LogCount {
    let n_total = margins.total() as f64;
    let pairs = |v: &[u64]| v.iter().map(|&x| (x as f64) * (x as f64 - 1.0) / 2.0).sum::<f64>();
    let exponent = 2.0 / (n_total * n_total) * pairs(margins.rows()) * pairs(margins.cols());
    LogCount::point(Method::Bbk, ln_multinomial(margins) + exponent)
}

/// The six exponent terms of the Greenhill-McKay correction, in order.
/// The 0-1 variant flips the sign of the first two.
pub fn gmk_exponent_terms(margins: &Margins) -> [f64; 6] {
    let f = margins.falling();
    let (r2, r3, c2, c3) = (f.r2 as f64, f.r3 as f64, f.c2 as f64, f.c3 as f64);
    let n = margins.total() as f64;
    let n2 = n * n;
    let n3 = n2 * n;
    let n4 = n3 * n;
    let n5 = n4 * n;
    [
        r2 * c2 / (2.0 * n2),
        r2 * c2 / (2.0 * n3),
        r3 * c3 / (3.0 * n3),
        -r2 * c2 * (r2 + c2) / (4.0 * n4),
        -(r2 * r2 * c3 + r3 * c2 * c2) / (2.0 * n4),
        r2 * r2 * c2 * c2 / (2.0 * n5),
    ]
}

/// Greenhill-McKay estimate keeping only the first `terms` exponent terms.
pub fn gmk_truncated(margins: &Margins, terms: usize) -> LogCount {
    let exponent: f64 = gmk_exponent_terms(margins).iter().take(terms).sum();
    LogCount::point(Method::Gmk, ln_multinomial(margins) + exponent)
}

/// Greenhill and McKay's corrected sparse-regime estimate.
pub fn gmk(margins: &Margins) -> LogCount {
    gmk_truncated(margins, 6)
}

// ---------------------------------------------------------------------------
// 0-1 matrices

pub fn alpha_c0(margins: &Margins) -> ZeroOneEffectiveColumns {
    alpha_c0_with_epsilon(margins, DEFAULT_EPSILON)
}

/// `α_c^(0) = (N² - N - (N² - c²)/m) / (c² - N + ε)`
pub fn alpha_c0_with_epsilon(margins: &Margins, epsilon: f64) -> ZeroOneEffectiveColumns {
    let n = margins.total() as f64;
    let c2 = margins.c2() as f64;
    let m = margins.m() as f64;
    let alpha0 = (n * n - n - (n * n - c2) / m) / (c2 - n + epsilon);
    ZeroOneEffectiveColumns { alpha0, epsilon }
}

fn ln_zero_one_cols(margins: &Margins) -> f64 {
    let m = margins.m() as f64;
    margins.cols().iter().map(|&c| lbinom(m, c as f64)).sum()
}

fn ec0_at(margins: &Margins, alpha0: f64) -> Result<f64> {
    let m = margins.m() as f64;
    let mut value = -ln_abs_binom(m * alpha0, margins.total())?;
    for &r in margins.rows() {
        value += ln_abs_binom(alpha0, r)?;
    }
    Ok(value + ln_zero_one_cols(margins))
}

/// Effective-columns estimate for 0-1 matrices.
///
/// The trial weight can be negative; its absolute value is used. If `α_c^(0)`
/// lands exactly on a zero or pole of one of the binomials it is nudged by a
/// relative 1e-9 once before giving up with [`Error::GammaPole`].
pub fn ec0(margins: &Margins) -> Result<LogCount> {
    if !gale_ryser_feasible(margins) {
        return Ok(LogCount::zero_count(Method::Ec0));
    }
    if margins.all_cols_one() {
        return Ok(LogCount::point(Method::Ec0, ln_unit_columns_count(margins)));
    }
    let alpha0 = alpha_c0(margins).alpha0;
    let first = ec0_at(margins, alpha0);
    if let Ok(v) = first {
        if v.is_finite() {
            return Ok(LogCount::point(Method::Ec0, v));
        }
    }
    let nudged = alpha0 + DEFAULT_EPSILON * alpha0.abs().max(1.0);
    match ec0_at(margins, nudged) {
        Ok(v) if v.is_finite() => Ok(LogCount::point(Method::Ec0, v)),
        _ => Err(Error::GammaPole(alpha0)),
    }
}

/// Good and Crook for 0-1 matrices: `C(mn, N)^-1 Π C(n, r_i) Π C(m, c_j)`.
pub fn gc0(margins: &Margins) -> LogCount {
    if !gale_ryser_feasible(margins) {
        return LogCount::zero_count(Method::Gc0);
    }
    LogCount::point(Method::Gc0, ln_gc0(margins))
}

fn ln_gc0(margins: &Margins) -> f64 {
    let m = margins.m() as f64;
    let n = margins.n() as f64;
    let rows: f64 = margins.rows().iter().map(|&r| lbinom(n, r as f64)).sum();
    rows + ln_zero_one_cols(margins) - lbinom(m * n, margins.total() as f64)
}

pub fn bbk0(margins: &Margins) -> LogCount {
    if !gale_ryser_feasible(margins) {
        return LogCount::zero_count(Method::Bbk0);
    }
    let n_total = margins.total() as f64;
    let pairs = |v: &[u64]| v.iter().map(|&x| (x as f64) * (x as f64 - 1.0) / 2.0).sum::<f64>();
    let exponent = -2.0 / (n_total * n_total) * pairs(margins.rows()) * pairs(margins.cols());
    LogCount::point(Method::Bbk0, ln_multinomial(margins) + exponent)
}

/// Exponent terms of the Greenhill-McKay-Wang estimate.
pub fn gmw0_exponent_terms(margins: &Margins) -> [f64; 6] {
    let mut terms = gmk_exponent_terms(margins);
    terms[0] = -terms[0];
    terms[1] = -terms[1];
    terms
}

pub fn gmw0_truncated(margins: &Margins, terms: usize) -> LogCount {
    if !gale_ryser_feasible(margins) {
        return LogCount::zero_count(Method::Gmw0);
    }
    let exponent: f64 = gmw0_exponent_terms(margins).iter().take(terms).sum();
    LogCount::point(Method::Gmw0, ln_multinomial(margins) + exponent)
}

pub fn gmw0(margins: &Margins) -> LogCount {
    gmw0_truncated(margins, 6)
}

/// The Canfield-Greenhill-McKay correction exponent
/// `-1/2 (1 - R/(2Amn)) (1 - C/(2Amn))`.
pub fn cgm0_correction(margins: &Margins) -> f64 {
    let m = margins.m() as f64;
    let n = margins.n() as f64;
    let n_total = margins.total() as f64;
    let spread = |v: &[u64], mean: f64| v.iter().map(|&x| (x as f64 - mean) * (x as f64 - mean)).sum::<f64>();
    let r = spread(margins.rows(), n_total / m);
    let c = spread(margins.cols(), n_total / n);
    let lambda = n_total / (m * n);
    let a = 0.5 * lambda * (1.0 - lambda);
    // A = 0 only for the full all-ones matrix, where R = C = 0 as well.
    let ratio = |s: f64| if s == 0.0 { 0.0 } else { s / (2.0 * a * m * n) };
    -0.5 * (1.0 - ratio(r)) * (1.0 - ratio(c))
}

pub fn cgm0(margins: &Margins) -> LogCount {
    if !gale_ryser_feasible(margins) {
        return LogCount::zero_count(Method::Cgm0);
    }
    LogCount::point(Method::Cgm0, ln_gc0(margins) + cgm0_correction(margins))
}

/// Evaluate any closed-form estimator by method id.
pub fn estimate(method: Method, margins: &Margins) -> Result<LogCount> {
    Ok(match method {
        Method::Ec => ec(margins),
        Method::EcSym => ec_symmetrized(margins),
        Method::Gc => gc(margins),
        Method::Gm => gm(margins),
        Method::De => de(margins)?,
        Method::Bbk => bbk(margins),
        Method::Gmk => gmk(margins),
        Method::Ec0 => ec0(margins)?,
        Method::Gc0 => gc0(margins),
        Method::Bbk0 => bbk0(margins),
        Method::Gmw0 => gmw0(margins),
        Method::Cgm0 => cgm0(margins),
        _ => return Err(Error::InvalidArgument("not a closed-form estimator")),
    })
}
