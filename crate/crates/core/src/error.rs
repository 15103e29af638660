use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("row sums total {rows} but column sums total {cols}")]
    SumMismatch { rows: u128, cols: u128 },

    #[error("margins are empty after removing zero entries")]
    Empty,

    #[error("argument {0} is outside the function's domain")]
    Domain(f64),

    #[error("Diaconis-Efron parameter K_c = {0} is not positive")]
    DegenerateK(f64),

    #[error("gamma function pole hit at {0} even after perturbation")]
    GammaPole(f64),

    #[error(
        "max-entropy solver did not converge in {iterations} sweeps \
         (row residual {row_residual:e}, column residual {col_residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        row_residual: f64,
        col_residual: f64,
    },

    #[error("Q matrix is not positive definite (pivot {index} = {pivot:e})")]
    SingularQ { index: usize, pivot: f64 },

    #[error("column total {needed} exceeds the remaining row capacity {available}")]
    Infeasible { needed: u64, available: u64 },

    #[error("exact count state space too large ({0} > guard)")]
    TooLarge(u128),

    #[error("invalid generator cell: {0}")]
    InvalidCell(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
