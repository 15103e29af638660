//! Error grids: generate margins per cell, establish a ground truth, run
//! every requested estimator and record its fractional error in `ln Ω`.
//!
//! Each (cell, replicate) job derives its own seed from the master seed,
//! so records do not depend on the worker count or on scheduling. Records
//! reach the sink in job order.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tablecount_core::estimate::fractional_error;
use tablecount_core::exact::{self, within_guard};
use tablecount_core::generate::{MarginGenerator, Scheme};
use tablecount_core::sis::{SisPlan, SisRun, TrialKind};
use tablecount_core::{LogCount, Margins, Method};

use crate::methods::{evaluate, EvalOptions, Orient};
use crate::parallel;

/// Estimates this close to the truth (in units of the truth's standard
/// error) cannot be told apart from it.
pub const TRUTH_LIMIT_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TruthMode {
    /// Exact when the oracle accepts the margins, EC-trial SIS otherwise.
    #[default]
    Auto,
    Exact,
    Sis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthPolicy {
    pub mode: TruthMode,
    /// Largest `Π (r_i + 1)` handed to the exact counter.
    pub exact_guard: u64,
    /// SIS iterations are added in batches of this size ...
    pub sis_batch: usize,
    /// ... until the standard error of `ln Ω` falls below this ...
    pub sis_target_std_err: f64,
    /// ... or this many iterations have run.
    pub sis_max_iterations: usize,
}

impl Default for TruthPolicy {
    fn default() -> Self {
        TruthPolicy {
            mode: TruthMode::Auto,
            exact_guard: exact::DEFAULT_STATE_GUARD as u64,
            sis_batch: 10_000,
            sis_target_std_err: 1e-3,
            sis_max_iterations: 1_000_000,
        }
    }
}

fn default_replicates() -> usize {
    10
}

fn default_budget() -> f64 {
    3600.0
}

fn default_schemes() -> Vec<String> {
    vec!["uniform".to_string()]
}

fn default_sis_iterations() -> usize {
    10_000
}

/// Grid configuration, read from JSON.
///
/// Cells are every combination of `m`, `n` and `total`. Without `n` the
/// grid is square (`n = m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub m: Vec<usize>,
    #[serde(default)]
    pub n: Option<Vec<usize>>,
    pub total: Vec<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub methods: Vec<String>,
    #[serde(default)]
    pub truth: TruthPolicy,
    /// Wall-clock budget per record.
    #[serde(default = "default_budget")]
    pub budget_seconds: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default)]
    pub zero_one: bool,
    /// Iterations for SIS methods under test.
    #[serde(default = "default_sis_iterations")]
    pub sis_iterations: usize,
    #[serde(default)]
    pub orient: Orient,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("grid has no cells")]
    EmptyGrid,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl GridSpec {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let spec: GridSpec = serde_json::from_str(text)?;
        spec.methods()?;
        spec.schemes()?;
        Ok(spec)
    }

    pub fn methods(&self) -> Result<Vec<Method>, BenchError> {
        self.methods
            .iter()
            .map(|s| s.parse::<Method>().map_err(|_| BenchError::UnknownMethod(s.clone())))
            .collect()
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>, BenchError> {
        self.schemes
            .iter()
            .map(|s| Scheme::from_id(s).ok_or_else(|| BenchError::UnknownScheme(s.clone())))
            .collect()
    }

    /// Every (scheme, m, n, N) cell in output order.
    pub fn cells(&self) -> Result<Vec<Cell>, BenchError> {
        let mut out = Vec::new();
        for scheme in self.schemes()? {
            for &m in &self.m {
                let ns = self.n.clone().unwrap_or_else(|| vec![m]);
                for &n in &ns {
                    for &total in &self.total {
                        out.push(Cell { scheme, m, n, total });
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(BenchError::EmptyGrid);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub scheme: Scheme,
    pub m: usize,
    pub n: usize,
    pub total: u64,
}

impl Cell {
    /// Why no margins can be drawn for this cell, if so.
    pub fn invalid_reason(&self, zero_one: bool) -> Option<&'static str> {
        if self.m == 0 || self.n == 0 || self.total == 0 {
            return Some("empty cell");
        }
        if (self.m as u64) > self.total || (self.n as u64) > self.total {
            return Some("more rows or columns than units");
        }
        if zero_one && self.total as u128 > self.m as u128 * self.n as u128 {
            return Some("more units than cells");
        }
        None
    }
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of one (cell, replicate) job.
pub fn cell_seed(master: u64, cell: &Cell, replicate: usize) -> u64 {
    let scheme = match cell.scheme {
        Scheme::UniformMargins => 1,
        Scheme::MatrixDerived => 2,
    };
    [scheme, cell.m as u64, cell.n as u64, cell.total, replicate as u64]
        .iter()
        .fold(mix(master), |acc, &v| mix(acc ^ v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub method: String,
    pub ln_omega: f64,
    /// Zero for exact counts.
    pub std_err: f64,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    pub ln_estimate: Option<f64>,
    pub std_err: Option<f64>,
    pub fractional_error: Option<f64>,
    pub truth_limited: bool,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub scheme: String,
    pub m: usize,
    pub n: usize,
    pub total: u64,
    pub replicate: usize,
    pub seed: u64,
    pub invalid: bool,
    pub timed_out: bool,
    pub error: Option<String>,
    pub rows: Vec<u64>,
    pub cols: Vec<u64>,
    pub truth: Option<Truth>,
    pub outcomes: Vec<MethodOutcome>,
}

impl ErrorRecord {
    fn blank(cell: &Cell, replicate: usize, seed: u64) -> Self {
        ErrorRecord {
            scheme: cell.scheme.id().to_string(),
            m: cell.m,
            n: cell.n,
            total: cell.total,
            replicate,
            seed,
            invalid: false,
            timed_out: false,
            error: None,
            rows: Vec::new(),
            cols: Vec::new(),
            truth: None,
            outcomes: Vec::new(),
        }
    }

    /// The record with wall times zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> ErrorRecord {
        let mut r = self.clone();
        r.outcomes.iter_mut().for_each(|o| o.seconds = 0.0);
        r
    }
}

fn exact_truth(margins: &Margins, zero_one: bool, guard: u128) -> Option<Truth> {
    // the count is symmetric; use whichever orientation has fewer states
    let t = margins.transposed();
    let pick = if within_guard(&t, guard) && !within_guard(margins, guard) { &t } else { margins };
    let (count, method) = if zero_one {
        (exact::count_exact_01_with_guard(pick, guard).ok()?, Method::Exact01)
    } else {
        (exact::count_exact_with_guard(pick, guard).ok()?, Method::Exact)
    };
    Some(Truth {
        method: method.id().to_string(),
        ln_omega: exact::ln_biguint(&count),
        std_err: 0.0,
        iterations: None,
    })
}

fn sis_truth(margins: &Margins, policy: &TruthPolicy, seed: u64, deadline: f64, start: &Instant) -> Result<Truth, String> {
    let plan = SisPlan::new(margins, TrialKind::Ec);
    let mut run = SisRun {
        trial: TrialKind::Ec,
        seed,
        column_order: plan.column_order().to_vec(),
        log_weights: Vec::new(),
    };
    let batch = policy.sis_batch.max(2);
    loop {
        let from = run.log_weights.len() as u64;
        let to = (from + batch as u64).min(policy.sis_max_iterations.max(2) as u64);
        for t in from..to {
            run.log_weights.push(plan.log_weight(seed, t).map_err(|e| e.to_string())?);
        }
        let done = run.std_err() <= policy.sis_target_std_err
            || run.log_weights.len() >= policy.sis_max_iterations
            || start.elapsed().as_secs_f64() > deadline;
        if done {
            break;
        }
    }
    Ok(Truth {
        method: Method::SisEc.id().to_string(),
        ln_omega: run.ln_estimate(),
        std_err: run.std_err(),
        iterations: Some(run.log_weights.len()),
    })
}

fn truth_for(margins: &Margins, spec: &GridSpec, seed: u64, start: &Instant) -> Result<Truth, String> {
    let guard = spec.truth.exact_guard as u128;
    let exact = || exact_truth(margins, spec.zero_one, guard);
    match (spec.truth.mode, spec.zero_one) {
        (TruthMode::Exact, _) | (_, true) => exact().ok_or_else(|| "margins exceed the exact guard".to_string()),
        (TruthMode::Auto, false) => match exact() {
            Some(t) => Ok(t),
            None => sis_truth(margins, &spec.truth, seed, spec.budget_seconds, start),
        },
        (TruthMode::Sis, false) => sis_truth(margins, &spec.truth, seed, spec.budget_seconds, start),
    }
}

/// Run one (cell, replicate) job.
pub fn run_record(spec: &GridSpec, cell: &Cell, replicate: usize) -> ErrorRecord {
    let seed = cell_seed(spec.seed, cell, replicate);
    let mut record = ErrorRecord::blank(cell, replicate, seed);
    if let Some(reason) = cell.invalid_reason(spec.zero_one) {
        record.invalid = true;
        record.error = Some(reason.to_string());
        return record;
    }
    let margins = match MarginGenerator::new(cell.scheme, cell.m, cell.n, cell.total, seed)
        .zero_one(spec.zero_one)
        .generate()
    {
        Ok(m) => m,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.rows = margins.rows().to_vec();
    record.cols = margins.cols().to_vec();
    let start = Instant::now();
    let truth = match truth_for(&margins, spec, seed, &start) {
        Ok(t) => t,
        Err(e) => {
            record.error = Some(e);
            return record;
        }
    };
    let opts = EvalOptions {
        sis_iterations: spec.sis_iterations,
        seed,
        exact_guard: spec.truth.exact_guard as u128,
        orient: spec.orient,
        ..EvalOptions::default()
    };
    for method in spec.methods().unwrap_or_default() {
        if start.elapsed().as_secs_f64() > spec.budget_seconds {
            record.timed_out = true;
            record.outcomes.push(MethodOutcome {
                method: method.id().to_string(),
                ln_estimate: None,
                std_err: None,
                fractional_error: None,
                truth_limited: false,
                seconds: 0.0,
                error: Some("time budget exhausted".to_string()),
            });
            continue;
        }
        let t0 = Instant::now();
        let result = evaluate(method, &margins, &opts, None);
        let seconds = t0.elapsed().as_secs_f64();
        record.outcomes.push(outcome(method, result, &truth, seconds));
    }
    record.truth = Some(truth);
    record
}

fn outcome(method: Method, result: tablecount_core::Result<LogCount>, truth: &Truth, seconds: f64) -> MethodOutcome {
    match result {
        Ok(v) => {
            let diff = (v.ln_omega - truth.ln_omega).abs();
            MethodOutcome {
                method: method.id().to_string(),
                ln_estimate: Some(v.ln_omega),
                std_err: v.std_err,
                fractional_error: fractional_error(v.ln_omega, truth.ln_omega),
                truth_limited: diff <= TRUTH_LIMIT_SIGMAS * truth.std_err,
                seconds,
                error: None,
            }
        }
        Err(e) => MethodOutcome {
            method: method.id().to_string(),
            ln_estimate: None,
            std_err: None,
            fractional_error: None,
            truth_limited: false,
            seconds,
            error: Some(e.to_string()),
        },
    }
}

/// Run every job on `threads` workers, handing records to `sink` in job
/// order as soon as each is ready.
pub fn run_grid<F>(spec: &GridSpec, threads: usize, mut sink: F) -> Result<(), BenchError>
where
    F: FnMut(&ErrorRecord) -> Result<(), BenchError>,
{
    spec.methods()?;
    let jobs: Vec<(Cell, usize)> = spec
        .cells()?
        .into_iter()
        .flat_map(|c| (0..spec.replicates).map(move |r| (c, r)))
        .collect();
    let pool = parallel::pool(threads);
    let (tx, rx) = mpsc::channel::<(usize, ErrorRecord)>();
    let mut result = Ok(());
    pool.in_place_scope(|scope| {
        scope.spawn(|_| {
            jobs.par_iter().enumerate().for_each_with(tx, |tx, (k, (cell, r))| {
                let _ = tx.send((k, run_record(spec, cell, *r)));
            });
        });
        let mut pending = BTreeMap::new();
        let mut next = 0usize;
        for (k, record) in rx.iter() {
            pending.insert(k, record);
            while let Some(record) = pending.remove(&next) {
                if result.is_ok() {
                    result = sink(&record);
                }
                next += 1;
            }
        }
    });
    result
}

/// Collect every record in job order.
pub fn collect_grid(spec: &GridSpec, threads: usize) -> Result<Vec<ErrorRecord>, BenchError> {
    let mut out = Vec::new();
    run_grid(spec, threads, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Per (cell, method) aggregate over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scheme: String,
    pub m: usize,
    pub n: usize,
    pub total: u64,
    pub method: String,
    pub replicates: usize,
    /// Replicates with a defined fractional error.
    pub evaluated: usize,
    pub mean_fractional_error: Option<f64>,
    pub truth_limited_share: f64,
    /// Every evaluated replicate is truth limited.
    pub truth_limited: bool,
    pub timed_out: usize,
    pub mean_seconds: f64,
    pub max_seconds: f64,
}

pub fn summarize(records: &[ErrorRecord]) -> Vec<CellSummary> {
    type Key = (String, usize, usize, u64, String);
    let mut groups: BTreeMap<Key, Vec<(&ErrorRecord, &MethodOutcome)>> = BTreeMap::new();
    let mut order: Vec<Key> = Vec::new();
    for r in records {
        for o in &r.outcomes {
            let key = (r.scheme.clone(), r.m, r.n, r.total, o.method.clone());
            let entry = groups.entry(key.clone()).or_default();
            if entry.is_empty() {
                order.push(key);
            }
            entry.push((r, o));
        }
    }
    order
        .into_iter()
        .map(|key| {
            let items = &groups[&key];
            let errs: Vec<f64> = items.iter().filter_map(|(_, o)| o.fractional_error).collect();
            let limited = items.iter().filter(|(_, o)| o.truth_limited).count();
            let secs: Vec<f64> = items.iter().map(|(_, o)| o.seconds).collect();
            let (scheme, m, n, total, method) = key;
            CellSummary {
                scheme,
                m,
                n,
                total,
                method,
                replicates: items.len(),
                evaluated: errs.len(),
                mean_fractional_error: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
                truth_limited_share: limited as f64 / items.len() as f64,
                truth_limited: limited == items.len(),
                timed_out: items.iter().filter(|(r, _)| r.timed_out).count(),
                mean_seconds: secs.iter().sum::<f64>() / secs.len() as f64,
                max_seconds: secs.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Stable CSV header for the given method list.
pub fn csv_header(methods: &[Method]) -> Vec<String> {
    let mut h: Vec<String> = [
        "scheme", "m", "n", "N", "replicate", "seed", "invalid", "timed_out", "error", "rows", "cols", "truth_method", "ln_truth",
        "truth_std_err",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for m in methods {
        for field in ["ln", "std_err", "frac_err", "truth_limited", "seconds", "error"] {
            h.push(format!("{}_{}", m.id(), field));
        }
    }
    h
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn csv_row(record: &ErrorRecord, methods: &[Method]) -> Vec<String> {
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut row = vec![
        record.scheme.clone(),
        record.m.to_string(),
        record.n.to_string(),
        record.total.to_string(),
        record.replicate.to_string(),
        record.seed.to_string(),
        record.invalid.to_string(),
        record.timed_out.to_string(),
        opt(&record.error),
        join(&record.rows),
        join(&record.cols),
        opt(&record.truth.as_ref().map(|t| t.method.clone())),
        opt(&record.truth.as_ref().map(|t| t.ln_omega)),
        opt(&record.truth.as_ref().map(|t| t.std_err)),
    ];
    for m in methods {
        match record.outcomes.iter().find(|o| o.method == m.id()) {
            Some(o) => row.extend([
                opt(&o.ln_estimate),
                opt(&o.std_err),
                opt(&o.fractional_error),
                o.truth_limited.to_string(),
                o.seconds.to_string(),
                opt(&o.error),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 6)),
        }
    }
    row
}

/// A method's mean error laid out as a matrix: rows follow `m`, columns
/// follow `N` for square grids and `n` otherwise (one block per `N`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotBlock {
    pub method: String,
    pub scheme: String,
    pub x_axis: String,
    pub fixed_total: Option<u64>,
    pub x: Vec<u64>,
    pub y: Vec<usize>,
    pub values: Vec<Vec<Option<f64>>>,
    pub truth_limited: Vec<Vec<bool>>,
}

pub fn plot_data(spec: &GridSpec, summary: &[CellSummary]) -> Result<Vec<PlotBlock>, BenchError> {
    let methods = spec.methods()?;
    let square = spec.n.is_none();
    let mut blocks = Vec::new();
    for scheme in spec.schemes()? {
        for method in &methods {
            let fixed: Vec<Option<u64>> = if square { vec![None] } else { spec.total.iter().map(|&t| Some(t)).collect() };
            for fixed_total in fixed {
                let x: Vec<u64> = if square {
                    spec.total.clone()
                } else {
                    spec.n.clone().unwrap_or_default().iter().map(|&n| n as u64).collect()
                };
                let find = |m: usize, xv: u64| {
                    summary.iter().find(|s| {
                        s.scheme == scheme.id()
                            && s.method == method.id()
                            && s.m == m
                            && match fixed_total {
                                None => s.total == xv && s.n == m,
                                Some(t) => s.total == t && s.n as u64 == xv,
                            }
                    })
                };
                let values = spec.m.iter().map(|&m| x.iter().map(|&xv| find(m, xv).and_then(|s| s.mean_fractional_error)).collect()).collect();
                let truth_limited =
                    spec.m.iter().map(|&m| x.iter().map(|&xv| find(m, xv).is_some_and(|s| s.truth_limited)).collect()).collect();
                blocks.push(PlotBlock {
                    method: method.id().to_string(),
                    scheme: scheme.id().to_string(),
                    x_axis: if square { "N" } else { "n" }.to_string(),
                    fixed_total,
                    x,
                    y: spec.m.clone(),
                    values,
                    truth_limited,
                });
            }
        }
    }
    Ok(blocks)
}

/// Run a grid and write `records.csv`, `summary.json` and optionally
/// `plot_data.json` into `out`. Returns the records.
pub fn run_to_dir(spec: &GridSpec, out: &Path, threads: usize, emit_plot_data: bool, progress: Option<&mut dyn Write>) -> Result<Vec<ErrorRecord>, BenchError> {
    fs::create_dir_all(out)?;
    let methods = spec.methods()?;
    let mut writer = csv::Writer::from_path(out.join("records.csv"))?;
    writer.write_record(csv_header(&methods))?;
    let total_jobs = spec.cells()?.len() * spec.replicates;
    let mut records = Vec::with_capacity(total_jobs);
    let mut progress = progress;
    run_grid(spec, threads, |r| {
        writer.write_record(csv_row(r, &methods))?;
        writer.flush()?;
        records.push(r.clone());
        if let Some(p) = progress.as_deref_mut() {
            writeln!(p, "[{}/{}] {} m={} n={} N={} rep={}", records.len(), total_jobs, r.scheme, r.m, r.n, r.total, r.replicate)?;
        }
        Ok(())
    })?;
    let summary = summarize(&records);
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    if emit_plot_data {
        fs::write(out.join("plot_data.json"), serde_json::to_string_pretty(&plot_data(spec, &summary)?)?)?;
    }
    Ok(records)
}
