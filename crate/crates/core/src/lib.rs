//! Mixed Poisson distributions generated by real-valued mixing laws.
//!
//! A mixed Poisson count `Y` draws its intensity from a mixing distribution
//! `X ~ F` and then `Y | X ~ Poisson(X)`. The mixing law is usually required
//! to sit on the nonnegative reals, but a light (subexponential) left tail
//! with a small amount of negative mass also produces a genuine count
//! distribution. This crate implements four such families
//! ([`FamilySpec`]): a two-point mixture, an asymmetric Laplace mixture, a
//! Gaussian mixture (the Hermite distribution), and the maximally
//! right-skewed stable family, together with
//!
//! - the existence gates for each family plus generic finite-horizon and
//!   necessary-condition checks ([`validity`]),
//! - exact PMF evaluation through closed forms or the scaled
//!   PGF-coefficient recursion, truncated tables, CDF/quantile, and count
//!   sampling ([`pmf`]),
//! - independent verification oracles: seeded, shardable Monte Carlo and
//!   adaptive quadrature ([`oracle`]).
//!
//! Every operation is a pure function of its inputs; samplers and estimators
//! are deterministic for a fixed seed.
//!
//! ```
//! use poimix::{check_family, pmf_table, FamilySpec, Verdict};
//!
//! let spec = FamilySpec::two_point(2.0, 2.0, 0.009)?;
//! assert_eq!(check_family(&spec).verdict, Verdict::Valid);
//!
//! let table = pmf_table(&spec, 1e-10, 100_000)?;
//! assert!((1.0 - table.accumulated()).abs() <= 1e-10);
//! # Ok::<(), poimix::Error>(())
//! ```

pub mod error;
pub mod families;
pub mod numeric;
pub mod oracle;
pub mod pmf;
pub mod validity;

pub use error::{Error, Result};
pub use families::{
    laplace, sample_mixing, split, tail_descriptor, term_neg, term_pos, FamilySpec, MassValue,
    PartLaw, Split, TailDescriptor,
};
pub use oracle::{mc_estimate, mc_p_neg, quad_estimate, term_quad, MassEstimate, OracleEstimate, Side};
pub use pmf::{
    growth_rate, pgf_coeffs, pgf_eval, pmf_closed, pmf_table, PgfSeries, PmfTable, RecursionState,
    TruncationReason,
};
pub use validity::{
    check_family, check_necessary, check_sufficient_numeric, CondStatus, NecessityReport,
    ValidityReport, Verdict, Witness,
};
