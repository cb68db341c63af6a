use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by spec construction, evaluation, and the verification oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A structural parameter violates its domain (caught at construction).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation has no closed form for this family.
    #[error("unsupported family {family}: {reason}")]
    UnsupportedFamily {
        family: &'static str,
        reason: &'static str,
    },

    /// The spec fails its existence gate; `rule` names the violated constraint.
    #[error("invalid spec ({rule}): {detail}")]
    InvalidSpec { rule: &'static str, detail: String },

    /// A probability mass came out negative beyond tolerance, which means an
    /// invalid spec slipped past the existence gates.
    #[error("negative probability at n = {n}: {value:e}")]
    NegativeProbability { n: usize, value: f64 },

    /// A quantile or count draw requested mass beyond what the table holds.
    #[error("insufficient mass: u = {u} exceeds accumulated {accumulated}")]
    InsufficientMass { u: f64, accumulated: f64 },

    /// A Monte Carlo contribution left the representable range.
    #[error(
        "monte carlo overflow at n = {n}: sample {sample:e} has log-magnitude {log_magnitude:e}"
    )]
    McOverflow {
        n: u64,
        sample: f64,
        log_magnitude: f64,
    },
}
