//! Random margins for benchmarking.
//!
//! Two schemes: margins drawn uniformly from all positive compositions of
//! `N`, and margins read off a uniformly random matrix with `N` units.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::gale_ryser_feasible;
use crate::margins::Margins;

/// Give up on a rejection loop after this many draws.
pub const MAX_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// `r` and `c` independently uniform over positive compositions of `N`.
    UniformMargins,
    /// Row and column sums of a uniformly random matrix with total `N`.
    MatrixDerived,
}

impl Scheme {
    pub fn id(self) -> &'static str {
        match self {
            Scheme::UniformMargins => "uniform",
            Scheme::MatrixDerived => "matrix",
        }
    }

    pub fn from_id(s: &str) -> Option<Scheme> {
        match s {
            "uniform" => Some(Scheme::UniformMargins),
            "matrix" => Some(Scheme::MatrixDerived),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarginGenerator {
    pub scheme: Scheme,
    pub m: usize,
    pub n: usize,
    pub total: u64,
    pub seed: u64,
    /// Only produce margins realizable by a 0-1 matrix.
    pub zero_one: bool,
    /// For [`Scheme::MatrixDerived`]: keep tables with empty rows or
    /// columns (their zero margins are then stripped) instead of redrawing.
    pub allow_zeros: bool,
}

impl MarginGenerator {
    pub fn new(scheme: Scheme, m: usize, n: usize, total: u64, seed: u64) -> Self {
        MarginGenerator {
            scheme,
            m,
            n,
            total,
            seed,
            zero_one: false,
            allow_zeros: false,
        }
    }

    pub fn zero_one(mut self, on: bool) -> Self {
        self.zero_one = on;
        self
    }

    pub fn allow_zeros(mut self, on: bool) -> Self {
        self.allow_zeros = on;
        self
    }

    /// Draw one margin pair; deterministic in the seed.
    pub fn generate(&self) -> Result<Margins> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.generate_with(&mut rng)
    }

    pub fn generate_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Margins> {
        if self.m == 0 || self.n == 0 || self.total == 0 {
            return Err(Error::InvalidCell("m, n and N must be positive"));
        }
        let positive = self.scheme == Scheme::UniformMargins || !self.allow_zeros;
        if positive && (self.total < self.m as u64 || self.total < self.n as u64) {
            return Err(Error::InvalidCell("N < max(m, n) leaves a zero margin"));
        }
        let cells = self.m as u128 * self.n as u128;
        if self.zero_one && self.total as u128 > cells {
            return Err(Error::InvalidCell("N > mn has no 0-1 matrix"));
        }
        for _ in 0..MAX_ATTEMPTS {
            if let Some(margins) = self.attempt(rng)? {
                return Ok(margins);
            }
        }
        Err(Error::InvalidCell("rejection sampling exhausted its attempts"))
    }

    fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<Margins>> {
        let (rows, cols) = match self.scheme {
            Scheme::UniformMargins => (
                composition(self.total, self.m, rng),
                composition(self.total, self.n, rng),
            ),
            Scheme::MatrixDerived => {
                let table = if self.zero_one {
                    zero_one_table(self.m, self.n, self.total, rng)
                } else {
                    random_table(self.m, self.n, self.total, rng)
                };
                let (rows, cols) = table_margins(&table, self.m, self.n);
                if !self.allow_zeros && (rows.contains(&0) || cols.contains(&0)) {
                    return Ok(None);
                }
                (rows, cols)
            }
        };
        let margins = Margins::new(&rows, &cols)?;
        if self.zero_one && self.scheme == Scheme::UniformMargins && !gale_ryser_feasible(&margins) {
            return Ok(None);
        }
        Ok(Some(margins))
    }
}

/// Uniform over positive integer vectors of length `parts` summing to
/// `total`: pick `parts - 1` distinct cut points among the `total - 1` gaps.
pub fn composition<R: Rng + ?Sized>(total: u64, parts: usize, rng: &mut R) -> Vec<u64> {
    assert!(parts >= 1 && total >= parts as u64);
    let mut cuts: Vec<u64> = index::sample(rng, (total - 1) as usize, parts - 1)
        .into_iter()
        .map(|c| c as u64 + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

/// Uniform over non-negative integer vectors of length `parts` summing to
/// `total`.
pub fn weak_composition<R: Rng + ?Sized>(total: u64, parts: usize, rng: &mut R) -> Vec<u64> {
    composition(total + parts as u64, parts, rng)
        .into_iter()
        .map(|x| x - 1)
        .collect()
}

/// Uniform over `m × n` non-negative integer matrices with total `total`,
/// row-major.
pub fn random_table<R: Rng + ?Sized>(m: usize, n: usize, total: u64, rng: &mut R) -> Vec<u64> {
    weak_composition(total, m * n, rng)
}

/// Uniform over `m × n` 0-1 matrices with `total` ones, row-major.
pub fn zero_one_table<R: Rng + ?Sized>(m: usize, n: usize, total: u64, rng: &mut R) -> Vec<u64> {
    let mut table = vec![0u64; m * n];
    for k in index::sample(rng, m * n, total as usize) {
        table[k] = 1;
    }
    table
}

/// Row and column sums of a row-major table (zeros kept).
pub fn table_margins(table: &[u64], m: usize, n: usize) -> (Vec<u64>, Vec<u64>) {
    let mut rows = vec![0u64; m];
    let mut cols = vec![0u64; n];
    for i in 0..m {
        for j in 0..n {
            rows[i] += table[i * n + j];
            cols[j] += table[i * n + j];
        }
    }
    (rows, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn chi_square_ok(counts: &[u64], draws: u64) -> bool {
        let k = counts.len() as f64;
        let expected = draws as f64 / k;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let df = k - 1.0;
        let p = 1.0 - statrs::function::gamma::gamma_lr(df / 2.0, stat / 2.0);
        p > 0.001
    }

    #[test]
    fn two_parts_of_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(composition(2, 2, &mut rng), vec![1, 1]);
        }
    }

    #[test]
    fn three_into_two_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 10_000;
        let ones = (0..draws).filter(|_| composition(3, 2, &mut rng) == vec![1, 2]).count() as f64;
        let sigma = (draws as f64 * 0.25).sqrt();
        assert!((ones - draws as f64 / 2.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn compositions_of_six_into_three_uniform() {
        // C(5, 2) = 10 compositions
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tally: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
            let draws = 20_000;
            for _ in 0..draws {
                *tally.entry(composition(6, 3, &mut rng)).or_default() += 1;
            }
            assert_eq!(tally.len(), 10);
            let counts: Vec<u64> = tally.values().copied().collect();
            assert!(chi_square_ok(&counts, draws), "seed {seed}: {tally:?}");
        }
    }

    #[test]
    fn matrix_derived_two_by_two() {
        // 10 tables with total 2; r = c = (1, 1) arises from 2 of them.
        let draws = 20_000u64;
        let mut hits = 0u64;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gen = MarginGenerator::new(Scheme::MatrixDerived, 2, 2, 2, 0).allow_zeros(true);
        for _ in 0..draws {
            let m = gen.generate_with(&mut rng).unwrap();
            if m.rows() == [1, 1] && m.cols() == [1, 1] {
                hits += 1;
            }
        }
        let p = 0.2;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - p * draws as f64).abs() <= 3.0 * sigma);
    }

    #[test]
    fn matrix_derived_rejects_zero_margins() {
        for seed in 0..50 {
            let m = MarginGenerator::new(Scheme::MatrixDerived, 3, 4, 9, seed).generate().unwrap();
            assert_eq!((m.m(), m.n(), m.total()), (3, 4, 9));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        for scheme in [Scheme::UniformMargins, Scheme::MatrixDerived] {
            let g = MarginGenerator::new(scheme, 4, 3, 20, 99);
            assert_eq!(g.generate().unwrap(), g.generate().unwrap());
        }
    }

    #[test]
    fn invalid_cells() {
        let g = MarginGenerator::new(Scheme::UniformMargins, 5, 2, 4, 0);
        assert!(matches!(g.generate(), Err(Error::InvalidCell(_))));
        let g = MarginGenerator::new(Scheme::MatrixDerived, 2, 2, 5, 0).zero_one(true);
        assert!(matches!(g.generate(), Err(Error::InvalidCell(_))));
    }

    #[test]
    fn zero_one_margins_are_feasible() {
        for seed in 0..100 {
            for scheme in [Scheme::UniformMargins, Scheme::MatrixDerived] {
                let m = MarginGenerator::new(scheme, 3, 4, 7, seed).zero_one(true).generate().unwrap();
                assert!(gale_ryser_feasible(&m));
            }
        }
    }
}
