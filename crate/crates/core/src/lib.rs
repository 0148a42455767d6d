//! Pathwise calculus for regulated price paths.
//!
//! Everything here is probability-free: a price history is a single regulated
//! function on `[0, T]` (piecewise-linear base plus finitely many one- or
//! two-sided jumps), and all quantities of interest are limits of sums or
//! products along nested partition sequences of the interval.
//!
//! # Key Components
//!
//! - [`paths`]: the [`RegulatedPath`] representation, nested partition
//!   sequences, and crash-time classification for price and return paths.
//! - [`variation`]: p-variation sums, the exact supremum over sub-partitions,
//!   local p-variation diagnostics, and variation-index estimation.
//! - [`integrate`]: refinement Riemann-Stieltjes, Left Cauchy-Stieltjes, and
//!   Left Young integrals, plus the agreement check between the last two.
//! - [`evolution`]: sum-integral and product-integral limit operators, their
//!   closed forms, the quadratic bracket, duality round trips, and the chain
//!   rule for left integrals.
//! - [`generate`]: seeded path generators (Brownian, fractional Brownian,
//!   symmetric stable, Weierstrass, exponential prices).
//! - [`trading`]: portfolio value/gain processes, self-financing residuals,
//!   discount invariance, the explicit two-asset arbitrage construction, and
//!   simple-strategy approximation.
//!
//! Convergence is always reported, never assumed: operators that take limits
//! return an [`IntegralResult`] whose [`ConvergenceReport`] carries the
//! per-level values, the final residual, and a verdict. Divergence is a
//! verdict, not an error.

pub mod error;
pub mod evolution;
pub mod generate;
pub mod integrate;
pub mod io;
pub mod paths;
pub mod report;
pub mod trading;
pub mod variation;

pub use error::Error;
pub use evolution::EvolutionPair;
pub use generate::GeneratorSpec;
pub use paths::{CrashTime, Jump, NestedPartitionSequence, RegulatedPath};
pub use report::{ConvergenceReport, IntegralResult, Tolerance, Verdict};
pub use trading::{PortfolioLedger, PriceSystem, Strategy};
pub use variation::{IndexEstimate, VariationProfile};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
