//! Validated row and column sums.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Sums of falling factorials of the margins, `R_k = Σ_i [r_i]_k` and
/// `C_k = Σ_j [c_j]_k` for k = 2, 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FallingFactorialSums {
    pub r2: u128,
    pub r3: u128,
    pub c2: u128,
    pub c3: u128,
}

/// A row-sum vector and a column-sum vector with equal totals.
///
/// Zero entries are removed on construction; they do not change the number
/// of matrices. Aggregates are cached in 128-bit integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Margins {
    rows: Vec<u64>,
    cols: Vec<u64>,
    total: u64,
    r2: u128,
    c2: u128,
    falling: FallingFactorialSums,
}

fn falling(x: u64, k: u32) -> u128 {
    (0..k as u64).fold(1u128, |acc, t| acc.saturating_mul(x.saturating_sub(t) as u128))
}

fn sum(values: &[u64]) -> u128 {
    values.iter().map(|&v| v as u128).sum()
}

impl Margins {
    pub fn new(rows: &[u64], cols: &[u64]) -> Result<Self> {
        let rows: Vec<u64> = rows.iter().copied().filter(|&v| v > 0).collect();
        let cols: Vec<u64> = cols.iter().copied().filter(|&v| v > 0).collect();
        let (row_total, col_total) = (sum(&rows), sum(&cols));
        if row_total != col_total {
            return Err(Error::SumMismatch {
                rows: row_total,
                cols: col_total,
            });
        }
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        let total = u64::try_from(row_total).map_err(|_| Error::InvalidArgument("total exceeds u64"))?;
        let squares = |v: &[u64]| v.iter().map(|&x| x as u128 * x as u128).sum::<u128>();
        let falling_sum = |v: &[u64], k| v.iter().fold(0u128, |acc, &x| acc.saturating_add(falling(x, k)));
        let falling = FallingFactorialSums {
            r2: falling_sum(&rows, 2),
            r3: falling_sum(&rows, 3),
            c2: falling_sum(&cols, 2),
            c3: falling_sum(&cols, 3),
        };
        Ok(Margins {
            r2: squares(&rows),
            c2: squares(&cols),
            rows,
            cols,
            total,
            falling,
        })
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn cols(&self) -> &[u64] {
        &self.cols
    }

    /// Number of rows `m`.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns `n`.
    pub fn n(&self) -> usize {
        self.cols.len()
    }

    /// Grand total `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `Σ r_i²`
    pub fn r2(&self) -> u128 {
        self.r2
    }

    /// `Σ c_j²`
    pub fn c2(&self) -> u128 {
        self.c2
    }

    pub fn falling(&self) -> FallingFactorialSums {
        self.falling
    }

    /// Rows and columns swapped.
    pub fn transposed(&self) -> Margins {
        Margins {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            total: self.total,
            r2: self.c2,
            c2: self.r2,
            falling: FallingFactorialSums {
                r2: self.falling.c2,
                r3: self.falling.c3,
                c2: self.falling.r2,
                c3: self.falling.r3,
            },
        }
    }

    /// Orientation with at least as many rows as columns.
    pub fn tall(&self) -> Margins {
        if self.m() < self.n() {
            self.transposed()
        } else {
            self.clone()
        }
    }

    pub fn all_cols_one(&self) -> bool {
        self.c2 == self.total as u128
    }
}
