//! Bayes prediction rules, prediction risk functionals and admissibility
//! certification for finite and conjugate predictive models.

pub mod admissibility;
pub mod cli;
pub mod error;
pub mod inference;
pub mod model;
pub mod modelspec;
pub mod numerics;
pub mod risk;
pub mod ruleopt;
pub mod suite;

pub use error::{Error, Result};
