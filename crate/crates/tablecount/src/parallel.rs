//! Multi-threaded sampling with results identical to the sequential run.

use rayon::prelude::*;
use rayon::ThreadPool;
use tablecount_core::sis::{SampledTable, SisPlan, SisRun, TrialKind};
use tablecount_core::{LogCount, Margins, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TABLECOUNT_THREADS";

/// Worker count from `TABLECOUNT_THREADS`, or rayon's default.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

pub fn pool(threads: usize) -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("failed to start worker threads")
}

/// Log weights of iterations `0..iterations`, computed in parallel and
/// returned in iteration order.
pub fn run(pool: &ThreadPool, margins: &Margins, trial: TrialKind, iterations: usize, seed: u64) -> Result<SisRun> {
    let plan = SisPlan::new(margins, trial);
    let log_weights = pool.install(|| {
        (0..iterations as u64)
            .into_par_iter()
            .map(|t| plan.log_weight(seed, t))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(SisRun {
        trial,
        seed,
        column_order: plan.column_order().to_vec(),
        log_weights,
    })
}

pub fn estimate_count(pool: &ThreadPool, margins: &Margins, trial: TrialKind, iterations: usize, seed: u64) -> Result<LogCount> {
    if iterations < 2 {
        return Err(tablecount_core::Error::InvalidArgument("at least two iterations are needed"));
    }
    Ok(run(pool, margins, trial, iterations, seed)?.log_count())
}

/// Draws `0..count` in order.
pub fn sample_tables(pool: &ThreadPool, margins: &Margins, trial: TrialKind, count: usize, seed: u64) -> Result<Vec<SampledTable>> {
    let plan = SisPlan::new(margins, trial);
    pool.install(|| (0..count as u64).into_par_iter().map(|t| plan.draw(seed, t)).collect())
}
