//! Multi-fidelity genetic hyperparameter optimization.
//!
//! The search runs over binary-encoded hyperparameter spaces and combines two
//! evaluation fidelities: a full evaluation (validation RMSE after training to
//! the complete epoch budget) and a fast evaluation (the drop in validation
//! RMSE over the first few epochs). A capacity-bounded elite archive of fully
//! evaluated genomes supplies one parent per mating and the final answer,
//! while each generation's offspring are screened by the fast score and only
//! a small candidate group is promoted to full evaluation.
//!
//! Alongside the main algorithm ([`ga::Hesga`]) the crate ships desk-scale
//! objectives, baseline optimizers (random, grid, full-evaluation GA), an
//! exhaustive oracle for small spaces, and the trial statistics (Welch t-test,
//! comparison reports) used to compare optimizers.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod ga;
pub mod objectives;
pub mod par;
pub mod seeds;
pub mod space;
pub mod stats;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
