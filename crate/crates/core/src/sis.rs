//! Sequential importance sampling.
//!
//! A table is built one column at a time, columns taken in non-increasing
//! order of their sums. Each column is drawn from a trial distribution
//! `q`, and `1/q(X)` averaged over draws is an unbiased estimate of the
//! count. Every iteration uses its own ChaCha stream (seed, iteration),
//! so iterations can run in any order or in parallel.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimate::{LogCount, Method};
use crate::linear::{effective_columns, DEFAULT_EPSILON};
use crate::margins::Margins;
use crate::math;
use crate::special::{ln_factorial, ln_gamma_diff, log_sum_exp};

/// How each column (or entry) is proposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialKind {
    /// Column weights `Π_i C(r'_i + α' - 1, α' - 1)` with `α'` the
    /// effective column count of the columns still to come.
    Ec,
    /// As `Ec` but `α'` is the number of columns still to come.
    Gc,
    /// Entry-by-entry proposals from a closed-form weight.
    Greedy,
}

impl TrialKind {
    pub const ALL: [TrialKind; 3] = [TrialKind::Ec, TrialKind::Gc, TrialKind::Greedy];

    pub fn method(self) -> Method {
        match self {
            TrialKind::Ec => Method::SisEc,
            TrialKind::Gc => Method::SisGc,
            TrialKind::Greedy => Method::SisGreedy,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            TrialKind::Ec => "ec",
            TrialKind::Gc => "gc",
            TrialKind::Greedy => "greedy",
        }
    }

    pub fn from_id(s: &str) -> Option<TrialKind> {
        TrialKind::ALL.iter().copied().find(|t| t.id() == s)
    }
}

/// Weight of leaving `s` units in a row after the current column.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Residual {
    /// `C(s + α - 1, s)`
    Alpha(f64),
    /// `1 / s!`, the `α → ∞` limit; exact when the remaining columns are
    /// all ones.
    Multinomial,
    /// Nothing may be left over: this is the last column.
    Forced,
}

impl Residual {
    fn ln_weight(self, s: u64) -> f64 {
        match self {
            Residual::Alpha(alpha) => ln_gamma_diff(alpha, s as f64) - ln_factorial(s),
            Residual::Multinomial => -ln_factorial(s),
            Residual::Forced if s == 0 => 0.0,
            Residual::Forced => f64::NEG_INFINITY,
        }
    }

    /// `ln λ` with `λ ≈ w(s̄ + 1) / w(s̄)`; tilting every weight by `λ^{-s}`
    /// changes no conditional probability (the residuals always add up to
    /// the same total) but keeps the products in floating-point range.
    fn ln_tilt(self, mean_residual: f64) -> f64 {
        match self {
            Residual::Alpha(alpha) => math::ln(mean_residual + alpha) - math::ln(mean_residual + 1.0),
            Residual::Multinomial => -math::ln(mean_residual + 1.0),
            Residual::Forced => 0.0,
        }
    }
}

/// A table drawn from the trial distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    m: usize,
    n: usize,
    /// Row-major, columns in the caller's original order.
    pub entries: Vec<u64>,
    /// `ln q(X)`
    pub log_q: f64,
}

impl SampledTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }
}

/// Chooses one outcome from a vector of unnormalized weights.
trait Pick {
    /// Offset into `weights`, or `None` if this outcome has probability 0.
    fn pick(&mut self, row: usize, lo: u64, weights: &[f64], total: f64) -> Option<usize>;
}

struct RandomPick<'a>(&'a mut ChaCha8Rng);

impl Pick for RandomPick<'_> {
    fn pick(&mut self, _row: usize, _lo: u64, weights: &[f64], total: f64) -> Option<usize> {
        let u = self.0.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = None;
        for (k, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last = Some(k);
                if u < acc {
                    return Some(k);
                }
            }
        }
        last
    }
}

/// Replays a given column.
struct GivenPick<'a>(&'a [u64]);

impl Pick for GivenPick<'_> {
    fn pick(&mut self, row: usize, lo: u64, weights: &[f64], _total: f64) -> Option<usize> {
        let x = self.0[row];
        let k = x.checked_sub(lo)? as usize;
        (k < weights.len() && weights[k] > 0.0).then_some(k)
    }
}

/// Columns in sampling order with their trial parameters. Built once per
/// margins and shared by every iteration.
#[derive(Debug, Clone)]
pub struct SisPlan {
    rows: Vec<u64>,
    /// Column sums in sampling (non-increasing) order.
    cols: Vec<u64>,
    /// `column_order[k]` is the caller's index of the `k`-th sampled column.
    column_order: Vec<usize>,
    trial: TrialKind,
    residual: Vec<Residual>,
}

impl SisPlan {
    pub fn new(margins: &Margins, trial: TrialKind) -> Self {
        let mut column_order: Vec<usize> = (0..margins.n()).collect();
        column_order.sort_by(|&a, &b| margins.cols()[b].cmp(&margins.cols()[a]));
        let cols: Vec<u64> = column_order.iter().map(|&j| margins.cols()[j]).collect();
        let m = margins.m();
        let mut residual = Vec::with_capacity(cols.len());
        for k in 0..cols.len() {
            let rest = &cols[k + 1..];
            let r = if rest.is_empty() {
                Residual::Forced
            } else {
                match trial {
                    TrialKind::Gc => Residual::Alpha(rest.len() as f64),
                    _ => {
                        let total: u64 = rest.iter().sum();
                        let c2: u128 = rest.iter().map(|&c| c as u128 * c as u128).sum();
                        if c2 == total as u128 {
                            Residual::Multinomial
                        } else {
                            Residual::Alpha(effective_columns(total, c2, m, DEFAULT_EPSILON))
                        }
                    }
                }
            };
            residual.push(r);
        }
        SisPlan {
            rows: margins.rows().to_vec(),
            cols,
            column_order,
            trial,
            residual,
        }
    }

    pub fn trial(&self) -> TrialKind {
        self.trial
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }

    pub fn column_order(&self) -> &[usize] {
        &self.column_order
    }

    /// Per-iteration random stream.
    pub fn rng(seed: u64, iteration: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(iteration);
        rng
    }

    /// Draw table number `iteration` of the stream keyed by `seed`.
    pub fn draw(&self, seed: u64, iteration: u64) -> Result<SampledTable> {
        let mut rng = Self::rng(seed, iteration);
        let (m, n) = (self.m(), self.n());
        let mut residual = self.rows.clone();
        let mut column = vec![0u64; m];
        let mut entries = vec![0u64; m * n];
        let mut log_q = 0.0;
        for k in 0..n {
            log_q += self.column(k, &mut residual, &mut column, &mut RandomPick(&mut rng))?;
            let j = self.column_order[k];
            for i in 0..m {
                entries[i * n + j] = column[i];
            }
        }
        Ok(SampledTable { m, n, entries, log_q })
    }

    /// `ln(1 / q(X))` of draw number `iteration`.
    pub fn log_weight(&self, seed: u64, iteration: u64) -> Result<f64> {
        let mut rng = Self::rng(seed, iteration);
        let mut residual = self.rows.clone();
        let mut column = vec![0u64; self.m()];
        let mut log_q = 0.0;
        for k in 0..self.n() {
            log_q += self.column(k, &mut residual, &mut column, &mut RandomPick(&mut rng))?;
        }
        Ok(-log_q)
    }

    /// `ln q(X)` of a given row-major table in the caller's column order;
    /// `-inf` if the trial can never produce it.
    pub fn log_q(&self, table: &[u64]) -> Result<f64> {
        let (m, n) = (self.m(), self.n());
        if table.len() != m * n {
            return Err(Error::InvalidArgument("table has the wrong shape"));
        }
        let mut residual = self.rows.clone();
        let mut given = vec![0u64; m];
        let mut column = vec![0u64; m];
        let mut log_q = 0.0;
        for k in 0..n {
            let j = self.column_order[k];
            for i in 0..m {
                given[i] = table[i * n + j];
            }
            match self.column(k, &mut residual, &mut column, &mut GivenPick(&given)) {
                Ok(lp) => log_q += lp,
                Err(Error::Infeasible { .. }) => return Ok(f64::NEG_INFINITY),
                Err(e) => return Err(e),
            }
            if column != given {
                return Ok(f64::NEG_INFINITY);
            }
        }
        Ok(log_q)
    }

    /// Fill sampled column `k`, updating `residual`; returns `ln` of the
    /// probability of the chosen column.
    fn column(&self, k: usize, residual: &mut [u64], out: &mut [u64], pick: &mut dyn Pick) -> Result<f64> {
        let c = self.cols[k];
        let available: u64 = residual.iter().sum();
        if available < c {
            return Err(Error::Infeasible { needed: c, available });
        }
        match self.trial {
            TrialKind::Greedy => greedy_column(residual, c, out, pick),
            _ => weighted_column(residual, c, self.residual[k], out, pick),
        }
    }
}

fn infeasible(needed: u64, residual: &[u64]) -> Error {
    Error::Infeasible {
        needed,
        available: residual.iter().sum(),
    }
}

/// One column from `q(x) ∝ Π_i w(r_i - x_i)`, `Σ x_i = c`, `0 ≤ x_i ≤ r_i`.
///
/// `tail[i][s]` is the total weight of placing `s` units in rows `i..`
/// (each level rescaled to max 1); the column is then drawn top-down from
/// the exact conditionals. Cost `O(m c²)`.
fn weighted_column(residual: &mut [u64], c: u64, weight: Residual, out: &mut [u64], pick: &mut dyn Pick) -> Result<f64> {
    let m = residual.len();
    let width = c as usize + 1;
    let total: u64 = residual.iter().sum();
    let ln_tilt = weight.ln_tilt((total - c) as f64 / m as f64);
    // row_w[i][x]: tilted weight of putting x units in row i
    let mut row_w: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &r in residual.iter() {
        let top = r.min(c);
        let logs: Vec<f64> = (0..=top)
            .map(|x| weight.ln_weight(r - x) - (r - x) as f64 * ln_tilt)
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row_w.push(logs.iter().map(|&l| if max.is_finite() { math::exp(l - max) } else { 0.0 }).collect());
    }
    let mut tail = vec![vec![0.0f64; width]; m + 1];
    tail[m][0] = 1.0;
    for i in (0..m).rev() {
        let (head, rest) = tail.split_at_mut(i + 1);
        let (cur, next) = (&mut head[i], &rest[0]);
        let w = &row_w[i];
        let mut max = 0.0f64;
        for s in 0..width {
            let mut acc = 0.0;
            for x in 0..w.len().min(s + 1) {
                acc += w[x] * next[s - x];
            }
            cur[s] = acc;
            max = max.max(acc);
        }
        if max > 0.0 {
            cur.iter_mut().for_each(|v| *v /= max);
        }
    }
    if !(tail[0][c as usize] > 0.0) {
        return Err(infeasible(c, residual));
    }
    let mut left = c as usize;
    let mut log_p = 0.0;
    let mut probs = Vec::with_capacity(width);
    for i in 0..m {
        probs.clear();
        let w = &row_w[i];
        let top = (w.len() - 1).min(left);
        probs.extend((0..=top).map(|x| w[x] * tail[i + 1][left - x]));
        let sum: f64 = probs.iter().sum();
        let Some(x) = pick.pick(i, 0, &probs, sum) else {
            return Err(infeasible(c, residual));
        };
        log_p += math::ln(probs[x] / sum);
        out[i] = x as u64;
        residual[i] -= x as u64;
        left -= x;
    }
    debug_assert_eq!(left, 0);
    Ok(log_p)
}

/// Unnormalized probability that the next entry of a column is `k`, given
/// the entry's row residual `r1`, the following row's residual `r2`, the
/// column total still to place `c1` and the residual total `total` of
/// this row and every row below it.
pub fn greedy_column_entry(r1: u64, r2: u64, c1: u64, total: u64, k: u64) -> f64 {
    let a = r2.min(c1 - k) as i128;
    let b = (c1 as i128 + r1 as i128 + r2 as i128 - total as i128 - k as i128).max(0);
    (a + b + 1) as f64
}

fn greedy_column(residual: &mut [u64], c: u64, out: &mut [u64], pick: &mut dyn Pick) -> Result<f64> {
    let m = residual.len();
    let mut below: u64 = residual.iter().sum();
    let mut left = c;
    let mut log_p = 0.0;
    let mut weights = Vec::new();
    for i in 0..m {
        let r1 = residual[i];
        let rest = below - r1;
        let r2 = if i + 1 < m { residual[i + 1] } else { 0 };
        let lo = left.saturating_sub(rest);
        let hi = r1.min(left);
        if lo > hi {
            return Err(infeasible(c, residual));
        }
        weights.clear();
        weights.extend((lo..=hi).map(|k| greedy_column_entry(r1, r2, left, below, k)));
        let sum: f64 = weights.iter().sum();
        let Some(k) = pick.pick(i, lo, &weights, sum) else {
            return Err(infeasible(c, residual));
        };
        log_p += math::ln(weights[k] / sum);
        let x = lo + k as u64;
        out[i] = x;
        residual[i] -= x;
        left -= x;
        below = rest;
    }
    Ok(log_p)
}

/// Log importance weights from one sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SisRun {
    pub trial: TrialKind,
    pub seed: u64,
    pub column_order: Vec<usize>,
    /// `ln(1 / q(X_t))` in iteration order.
    pub log_weights: Vec<f64>,
}

impl SisRun {
    pub fn iterations(&self) -> usize {
        self.log_weights.len()
    }

    /// `ln( (1/K) Σ 1/q(X_t) )`
    pub fn ln_estimate(&self) -> f64 {
        log_sum_exp(&self.log_weights) - math::ln(self.log_weights.len() as f64)
    }

    /// Delta-method standard error of [`ln_estimate`](Self::ln_estimate):
    /// `sd(w) / (mean(w) √K)`.
    pub fn std_err(&self) -> f64 {
        let k = self.log_weights.len() as f64;
        if k < 2.0 {
            return f64::INFINITY;
        }
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_weights.iter().map(|&l| math::exp(l - max)).collect();
        let mean = w.iter().sum::<f64>() / k;
        let var = w.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
        math::sqrt(var) / (mean * math::sqrt(k))
    }

    /// `(Σ w)² / Σ w²`
    pub fn ess(&self) -> f64 {
        let doubled: Vec<f64> = self.log_weights.iter().map(|&l| 2.0 * l).collect();
        math::exp(2.0 * log_sum_exp(&self.log_weights) - log_sum_exp(&doubled))
    }

    pub fn log_count(&self) -> LogCount {
        LogCount::sampled(self.trial.method(), self.ln_estimate(), self.std_err())
    }
}

/// Run `iterations` sequential draws.
pub fn run(margins: &Margins, trial: TrialKind, iterations: usize, seed: u64) -> Result<SisRun> {
    let plan = SisPlan::new(margins, trial);
    let log_weights = (0..iterations as u64)
        .map(|t| plan.log_weight(seed, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SisRun {
        trial,
        seed,
        column_order: plan.column_order.clone(),
        log_weights,
    })
}

/// Importance-sampling estimate of `ln Ω` with its standard error.
pub fn estimate_count(margins: &Margins, trial: TrialKind, iterations: usize, seed: u64) -> Result<LogCount> {
    if iterations < 2 {
        return Err(Error::InvalidArgument("at least two iterations are needed"));
    }
    Ok(run(margins, trial, iterations, seed)?.log_count())
}

/// Tables drawn from the trial with their `ln q`, for reweighting.
#[derive(Debug, Clone)]
pub struct SampleTables {
    plan: SisPlan,
    seed: u64,
    next: u64,
    count: u64,
}

impl Iterator for SampleTables {
    type Item = Result<SampledTable>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.count {
            return None;
        }
        let t = self.plan.draw(self.seed, self.next);
        self.next += 1;
        Some(t)
    }
}

pub fn sample_tables(margins: &Margins, trial: TrialKind, count: usize, seed: u64) -> SampleTables {
    SampleTables {
        plan: SisPlan::new(margins, trial),
        seed,
        next: 0,
        count: count as u64,
    }
}

/// Draw one column of total `col_total` from rows with the given
/// residuals under `C(r_i - x_i + α - 1, α - 1)` weights.
pub fn sample_column(
    remaining_rows: &[u64],
    col_total: u64,
    alpha_next: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<u64>, f64)> {
    let mut residual = remaining_rows.to_vec();
    let mut out = vec![0u64; residual.len()];
    let available: u64 = residual.iter().sum();
    if available < col_total {
        return Err(Error::Infeasible {
            needed: col_total,
            available,
        });
    }
    let lp = weighted_column(&mut residual, col_total, Residual::Alpha(alpha_next), &mut out, &mut RandomPick(rng))?;
    Ok((out, lp))
}

/// `ln q` of `column` under [`sample_column`]'s distribution.
pub fn column_log_prob(remaining_rows: &[u64], column: &[u64], alpha_next: f64) -> Result<f64> {
    let mut residual = remaining_rows.to_vec();
    let mut out = vec![0u64; residual.len()];
    let c = column.iter().sum();
    match weighted_column(&mut residual, c, Residual::Alpha(alpha_next), &mut out, &mut GivenPick(column)) {
        Err(Error::Infeasible { .. }) => Ok(f64::NEG_INFINITY),
        other => other,
    }
}
