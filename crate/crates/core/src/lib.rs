//! Generalized psi-estimators as points of sign change of score sums,
//! empirical audits of the axioms that characterise them, and synthesis of
//! score functions from black-box estimators.

// `!(a < b)` is used on purpose: it is true for NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axiomlab;
pub mod catalog;
pub mod error;
pub mod estimator;
pub mod model;
pub mod oracles;
pub mod proofkit;
pub mod scalar;
pub mod signchange;

pub use error::{Error, Result};
pub use model::{Claims, Observation, ParameterInterval, WeightedSample};

pub type Score = model::ScoreFamily<f64>;
pub type Oracle = model::EstimatorOracle<f64>;
pub type Tolerances = model::Tolerances<f64>;
pub type Interval = model::ParameterInterval<f64>;
pub type Generator = catalog::Generator<f64>;
