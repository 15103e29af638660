//! Estimate values and the method registry.

use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// Every way this crate can produce a (log) count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Effective columns.
    Ec,
    /// Effective columns, averaged over both orientations.
    EcSym,
    /// Good and Crook.
    Gc,
    /// Gail and Mantel.
    Gm,
    /// Diaconis and Efron.
    De,
    /// Békéssy, Békéssy and Komlós.
    Bbk,
    /// Greenhill and McKay.
    Gmk,
    /// Gaussian maximum entropy.
    MaxentG,
    /// Edgeworth-corrected maximum entropy.
    MaxentE,
    SisEc,
    SisGc,
    SisGreedy,
    Exact,
    Ec0,
    Gc0,
    Bbk0,
    Gmw0,
    Cgm0,
    Exact01,
}

impl Method {
    pub const ALL: [Method; 19] = [
        Method::Ec,
        Method::EcSym,
        Method::Gc,
        Method::Gm,
        Method::De,
        Method::Bbk,
        Method::Gmk,
        Method::MaxentG,
        Method::MaxentE,
        Method::SisEc,
        Method::SisGc,
        Method::SisGreedy,
        Method::Exact,
        Method::Ec0,
        Method::Gc0,
        Method::Bbk0,
        Method::Gmw0,
        Method::Cgm0,
        Method::Exact01,
    ];

    /// Stable string id used on the command line and in result files.
    pub fn id(self) -> &'static str {
        match self {
            Method::Ec => "ec",
            Method::EcSym => "ec-sym",
            Method::Gc => "gc",
            Method::Gm => "gm",
            Method::De => "de",
            Method::Bbk => "bbk",
            Method::Gmk => "gmk",
            Method::MaxentG => "maxent-g",
            Method::MaxentE => "maxent-e",
            Method::SisEc => "sis-ec",
            Method::SisGc => "sis-gc",
            Method::SisGreedy => "sis-greedy",
            Method::Exact => "exact",
            Method::Ec0 => "ec0",
            Method::Gc0 => "gc0",
            Method::Bbk0 => "bbk0",
            Method::Gmw0 => "gmw0",
            Method::Cgm0 => "cgm0",
            Method::Exact01 => "exact01",
        }
    }

    pub fn is_sampling(self) -> bool {
        matches!(self, Method::SisEc | Method::SisGc | Method::SisGreedy)
    }

    /// Methods that count 0-1 matrices rather than non-negative integer ones.
    pub fn is_zero_one(self) -> bool {
        matches!(
            self,
            Method::Ec0 | Method::Gc0 | Method::Bbk0 | Method::Gmw0 | Method::Cgm0 | Method::Exact01
        )
    }

    /// Closed-form methods that run in O(m + n).
    pub fn is_linear_time(self) -> bool {
        matches!(
            self,
            Method::Ec
                | Method::EcSym
                | Method::Gc
                | Method::Gm
                | Method::De
                | Method::Bbk
                | Method::Gmk
                | Method::Ec0
                | Method::Gc0
                | Method::Bbk0
                | Method::Gmw0
                | Method::Cgm0
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.id() == s)
            .ok_or(Error::InvalidArgument("unknown method id"))
    }
}

/// A natural-log count produced by some [`Method`].
///
/// Sampling methods carry a standard error of `ln_omega`; nothing else
/// does. A count of zero (only possible for 0-1 margins that fail the
/// Gale-Ryser test) is represented by `ln_omega == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCount {
    pub ln_omega: f64,
    pub method: Method,
    pub std_err: Option<f64>,
}

impl LogCount {
    pub fn point(method: Method, ln_omega: f64) -> Self {
        LogCount {
            ln_omega,
            method,
            std_err: None,
        }
    }

    pub fn sampled(method: Method, ln_omega: f64, std_err: f64) -> Self {
        LogCount {
            ln_omega,
            method,
            std_err: Some(std_err),
        }
    }

    pub fn zero_count(method: Method) -> Self {
        LogCount::point(method, f64::NEG_INFINITY)
    }

    pub fn is_zero_count(&self) -> bool {
        self.ln_omega == f64::NEG_INFINITY
    }

    pub fn log10(&self) -> f64 {
        self.ln_omega * core::f64::consts::LOG10_E
    }

    /// `|ln est - ln truth| / ln truth`; `None` when `ln truth` is zero
    /// (the count is 1) or either side is not finite.
    pub fn fractional_error(&self, truth: f64) -> Option<f64> {
        fractional_error(self.ln_omega, truth)
    }
}

/// `|ln est - ln truth| / |ln truth|`, undefined when the true count is 1.
pub fn fractional_error(ln_est: f64, ln_truth: f64) -> Option<f64> {
    if !ln_est.is_finite() || !ln_truth.is_finite() || ln_truth == 0.0 {
        return None;
    }
    Some((ln_est - ln_truth).abs() / ln_truth.abs())
}
