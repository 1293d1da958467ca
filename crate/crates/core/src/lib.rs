//! Counting 0-1 matrices with prescribed row and column sums.
//!
//! The crate estimates the number of binary contingency tables μ(r, c) with a
//! sequential importance sampler whose column proposals are conditional-Poisson
//! distributions tilted by the sparse-regime asymptotic count
//! φ(r, c)·exp(−α(r, c)). Exact counts from a residual-class dynamic program
//! (and, for tiny instances, plain enumeration) serve as ground truth.
//!
//! Module map:
//!
//! - [`instance`]: margins, normalization, falling factorials, Gale–Ryser.
//! - [`sequence`]: ratio and fourth-moment diagnostics of the column sequence.
//! - [`mckay`]: log-domain asymptotic approximation of the count.
//! - [`cp`]: conditional-Poisson sampling and elementary symmetric sums.
//! - [`sis`]: the column-by-column importance sampler and batch driver.
//! - [`oracle`]: exact counts, exact `u(s, ρ)` and the zero-variance kernel.
//! - [`stats`]: aggregation, replication planning and efficiency reports.
//! - [`harness`]: instance generation and sampler/oracle comparisons.
//!
//! All counts are carried as natural logarithms; `f64::NEG_INFINITY` encodes
//! a count of zero.

pub mod cp;
mod error;
pub mod harness;
pub mod instance;
pub mod logspace;
pub mod mckay;
pub mod oracle;
mod par;
pub mod rng;
pub mod sequence;
pub mod sis;
pub mod stats;

pub use error::{Error, Result};
pub use instance::Instance;
