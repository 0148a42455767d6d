//! Error taxonomy shared by every module.

use crate::paths::CrashTime;

/// All failure cases surfaced by the crate.
///
/// Domain errors are about arguments (a time outside `[0, T]`, an unsorted
/// partition); precondition errors are about paths that do not satisfy an
/// operator's hypotheses (touching zero, carrying two-sided jumps where one
/// sided ones are required). Divergence of a limit is never an error; it is a
/// verdict on the [`crate::ConvergenceReport`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed argument values.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented hypothesis of the operator failed on the given input.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The brute-force oracle refuses inputs past its enumeration bound.
    #[error("oracle refuses {n} points (enumeration bound is {max})")]
    OracleTooLarge { n: usize, max: usize },

    /// A computation ran past the horizon where the path stops making sense
    /// (price hit zero, or a return jump of -1 or below).
    #[error("horizon reached: {reason} (crash {crash:?})")]
    Horizon { reason: String, crash: CrashTime },

    /// Neither hypothesis that would make two left integrals agree held.
    #[error("integration hypothesis violated: {0}")]
    Hypothesis(String),

    /// Generation failed (bad parameters or both sampling schemes rejected).
    #[error("generator error: {0}")]
    Generator(String),

    /// CSV or partition-file input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
