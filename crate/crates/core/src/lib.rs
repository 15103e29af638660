//! Counting, estimating and sampling non-negative integer matrices with
//! prescribed row and column sums.
//!
//! Everything here is pure computation over [`Margins`]: closed-form
//! linear-time estimators ([`linear`]), the maximum-entropy Gaussian and
//! Edgeworth estimates ([`maxent`]), sequential importance sampling
//! ([`sis`]), an exact dynamic-programming oracle for small instances
//! ([`exact`]) and the margin generators used for benchmarking
//! ([`generate`]). All counts are carried as natural logarithms.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod estimate;
pub mod exact;
pub mod generate;
pub mod linear;
pub mod margins;
pub mod maxent;
pub mod sis;
pub mod special;

pub use error::{Error, Result};
pub use estimate::{LogCount, Method};
pub use margins::{FallingFactorialSums, Margins};
