//! Exact finite-alphabet computations for conditional large deviations of
//! empirical measures: the laws `μ_n`, the conditional kernels `η_n`, the
//! rate functions `J` and `I`, and the Sanov-type bounds that connect them.

pub mod cli;
pub mod empirical;
pub mod error;
pub mod exact;
pub mod finite_measures;
pub mod gallery;
pub mod harness;
pub mod kernels;
pub mod rate;
pub mod report;
pub mod rounding;
pub mod sampling;

pub use error::{Error, Result};
