//! Numerical laboratory for random completely multiplicative functions
//! `f: N -> {±1}`.
//!
//! The crate samples `f` from a seed, streams the partial sums
//! `S_x = sum_{n <= x} f(n)/sqrt(n)` to count sign changes, and evaluates the
//! transforms used to study them: truncated Dirichlet series, the step-integral
//! transform `F(t) = int_1^X S_x x^(-1-t) dx`, truncated Euler products and the
//! prime statistic `R(t)`. A deterministic analytic kernel (real zeta, prime
//! zeta) supplies exact variances and covariances, and the Monte Carlo layer
//! compares ensembles of seeds against them.
//!
//! All results are pure functions of their inputs and seeds; parallel code
//! reduces in a fixed order so output never depends on the worker count.

pub mod analytic;
pub mod census;
pub mod cli;
pub mod error;
pub mod montecarlo;
mod parallel;
pub mod sampler;
pub mod sieve;
pub mod stats;
pub mod sum;
pub mod transforms;

pub use analytic::{AnalyticValue, TGrid};
pub use census::CensusReport;
pub use error::{Error, Result};
pub use montecarlo::{EnsembleConfig, EnsembleStats};
pub use sampler::{Mode, Sign, SignOracle};
pub use sieve::{PrimeRange, Sieve, SpfBlock};
pub use transforms::TruncationSpec;
