//! Desk-scale objectives satisfying the objective contract.
//!
//! [`synthetic`] provides a closed-form learning-curve family with analytic
//! ground truth, [`mlp`] a tiny gradient-trained regressor with genuine
//! stochastic training dynamics, and [`oracle`] an exhaustive evaluator for
//! spaces small enough to enumerate.

pub mod mlp;
pub mod oracle;
pub mod synthetic;

pub use mlp::{generate_regression_dataset, Dataset, MlpRegressionObjective};
pub use oracle::{exhaustive_oracle, OracleRow, OracleTable, SeedPolicy};
pub use synthetic::{DimTerm, GapRule, ParamMap, SyntheticCurveObjective};
