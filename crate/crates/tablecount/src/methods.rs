//! One entry point for every [`Method`].

use rayon::ThreadPool;
use tablecount_core::exact::{count_exact_01_with_guard, count_exact_with_guard, ln_biguint, DEFAULT_STATE_GUARD};
use tablecount_core::maxent::{self, DEFAULT_MAX_ITER, DEFAULT_TOL};
use tablecount_core::sis::{self, TrialKind};
use tablecount_core::{linear, LogCount, Margins, Method, Result};

use crate::parallel;

/// Which way round the margins are handed to an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orient {
    /// Exactly as given.
    #[default]
    AsGiven,
    /// Swap rows and columns when there are fewer rows than columns.
    Auto,
}

impl Orient {
    pub fn apply(self, margins: &Margins) -> Margins {
        match self {
            Orient::AsGiven => margins.clone(),
            Orient::Auto => margins.tall(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub sis_iterations: usize,
    pub seed: u64,
    pub exact_guard: u128,
    pub orient: Orient,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            sis_iterations: 10_000,
            seed: 0,
            exact_guard: DEFAULT_STATE_GUARD,
            orient: Orient::AsGiven,
        }
    }
}

pub fn trial_of(method: Method) -> Option<TrialKind> {
    match method {
        Method::SisEc => Some(TrialKind::Ec),
        Method::SisGc => Some(TrialKind::Gc),
        Method::SisGreedy => Some(TrialKind::Greedy),
        _ => None,
    }
}

/// Evaluate `method`; sampling runs on `pool` when one is given and
/// sequentially otherwise, with identical results.
pub fn evaluate(method: Method, margins: &Margins, opts: &EvalOptions, pool: Option<&ThreadPool>) -> Result<LogCount> {
    let margins = opts.orient.apply(margins);
    if method.is_linear_time() {
        return linear::estimate(method, &margins);
    }
    if let Some(trial) = trial_of(method) {
        return match pool {
            Some(pool) => parallel::estimate_count(pool, &margins, trial, opts.sis_iterations, opts.seed),
            None => sis::estimate_count(&margins, trial, opts.sis_iterations, opts.seed),
        };
    }
    match method {
        Method::MaxentG => maxent::gaussian_estimate_with(&margins, opts.tol, opts.max_iter),
        Method::MaxentE => maxent::edgeworth_estimate_with(&margins, opts.tol, opts.max_iter),
        Method::Exact => {
            let count = count_exact_with_guard(&margins, opts.exact_guard)?;
            Ok(LogCount::point(Method::Exact, ln_biguint(&count)))
        }
        Method::Exact01 => {
            let count = count_exact_01_with_guard(&margins, opts.exact_guard)?;
            Ok(LogCount::point(Method::Exact01, ln_biguint(&count)))
        }
        _ => unreachable!("every method is dispatched above"),
    }
}
