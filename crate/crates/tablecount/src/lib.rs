//! File formats, parallel sampling, the benchmark harness and the command
//! line front end for [`tablecount_core`].

pub mod bench;
pub mod format;
pub mod methods;
pub mod parallel;

pub use tablecount_core as core;
