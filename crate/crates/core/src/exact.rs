//! Exact counts for small margins.
//!
//! Columns are filled one at a time and the partial fillings are grouped by
//! the multiset of residual row sums; the number of ways to finish a matrix
//! only depends on that multiset. Counts are exact big integers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::margins::Margins;
use crate::math;

/// Maximum `Π (r_i + 1)` accepted by the exact counters.
pub const DEFAULT_STATE_GUARD: u128 = 10_000_000;

/// Residual row sums (sorted descending) mapped to the number of partial
/// matrices that reach them.
#[derive(Debug, Clone, Default)]
pub struct RowStateTable {
    states: BTreeMap<Vec<u64>, BigUint>,
}

impl RowStateTable {
    fn start(rows: &[u64]) -> Self {
        let mut states = BTreeMap::new();
        states.insert(canonical(rows.to_vec()), BigUint::from(1u32));
        RowStateTable { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, residual: &[u64]) -> Option<&BigUint> {
        self.states.get(&canonical(residual.to_vec()))
    }

    fn advance(&self, column: u64, cap: u64) -> RowStateTable {
        let mut next: BTreeMap<Vec<u64>, BigUint> = BTreeMap::new();
        let mut scratch = Vec::new();
        for (state, count) in &self.states {
            scratch.clear();
            scratch.extend_from_slice(state);
            let mut tail = Vec::with_capacity(state.len() + 1);
            let mut acc = 0u64;
            for &s in state.iter().rev() {
                acc += s.min(cap);
                tail.push(acc);
            }
            tail.reverse();
            tail.push(0);
            fill(&mut scratch, &tail, 0, column, cap, &mut |residual| {
                let key = canonical(residual.to_vec());
                *next.entry(key).or_insert_with(BigUint::zero) += count;
            });
        }
        RowStateTable { states: next }
    }
}

fn canonical(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// Enumerate every way of removing `left` units from `residual[i..]`, at most
/// `cap` from any single entry; `tail[i]` bounds what rows `i..` can absorb.
fn fill(
    residual: &mut [u64],
    tail: &[u64],
    i: usize,
    left: u64,
    cap: u64,
    emit: &mut dyn FnMut(&[u64]),
) {
    if left == 0 {
        emit(residual);
        return;
    }
    if i == residual.len() || tail[i] < left {
        return;
    }
    let hi = residual[i].min(cap).min(left);
    let lo = left.saturating_sub(tail[i + 1]);
    let original = residual[i];
    for x in lo..=hi {
        residual[i] = original - x;
        fill(residual, tail, i + 1, left - x, cap, emit);
    }
    residual[i] = original;
}

fn state_bound(margins: &Margins) -> u128 {
    margins
        .rows()
        .iter()
        .fold(1u128, |acc, &r| acc.saturating_mul(r as u128 + 1))
}

fn run(margins: &Margins, cap: u64, guard: u128) -> Result<BigUint> {
    let bound = state_bound(margins);
    if bound > guard {
        return Err(Error::TooLarge(bound));
    }
    let mut cols = margins.cols().to_vec();
    cols.sort_unstable_by(|a, b| b.cmp(a));
    let mut table = RowStateTable::start(margins.rows());
    for &c in &cols {
        table = table.advance(c, cap);
        if table.is_empty() {
            return Ok(BigUint::zero());
        }
    }
    Ok(table
        .states
        .into_iter()
        .find(|(s, _)| s.iter().all(|&x| x == 0))
        .map(|(_, count)| count)
        .unwrap_or_default())
}

/// Exact number of non-negative integer matrices with these margins.
pub fn count_exact(margins: &Margins) -> Result<BigUint> {
    count_exact_with_guard(margins, DEFAULT_STATE_GUARD)
}

pub fn count_exact_with_guard(margins: &Margins, guard: u128) -> Result<BigUint> {
    run(margins, u64::MAX, guard)
}

/// Exact number of 0-1 matrices with these margins.
pub fn count_exact_01(margins: &Margins) -> Result<BigUint> {
    count_exact_01_with_guard(margins, DEFAULT_STATE_GUARD)
}

pub fn count_exact_01_with_guard(margins: &Margins, guard: u128) -> Result<BigUint> {
    run(margins, 1, guard)
}

/// Whether the exact counters accept these margins under `guard`.
pub fn within_guard(margins: &Margins, guard: u128) -> bool {
    state_bound(margins) <= guard
}

/// Gale-Ryser: some 0-1 matrix has these margins iff, with `r` sorted
/// descending, `Σ_{i≤k} r_i ≤ Σ_j min(c_j, k)` for every k.
pub fn gale_ryser_feasible(margins: &Margins) -> bool {
    let mut rows = margins.rows().to_vec();
    rows.sort_unstable_by(|a, b| b.cmp(a));
    let mut cols = margins.cols().to_vec();
    cols.sort_unstable();
    // Σ_j min(c_j, k) = (sum of the c_j below k) + k · #{c_j ≥ k}
    let (mut below, mut small) = (0u128, 0usize);
    let mut prefix = 0u128;
    for (k, &r) in rows.iter().enumerate() {
        let k = k as u64 + 1;
        while small < cols.len() && cols[small] < k {
            below += cols[small] as u128;
            small += 1;
        }
        prefix += r as u128;
        let capacity = below + k as u128 * (cols.len() - small) as u128;
        if prefix > capacity {
            return false;
        }
    }
    true
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return math::ln(x.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    math::ln(top) + shift as f64 * core::f64::consts::LN_2
}
