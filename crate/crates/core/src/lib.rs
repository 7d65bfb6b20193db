//! Bivariate extreme value copulas through their Pickands dependence
//! functions: dependence coefficients (Spearman's rho, Kendall's tau, the upper
//! tail coefficient and Blomqvist's beta), pointwise and coefficient bounds
//! given the tail coefficient, and seeded sampling with empirical estimators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod coefficients;
pub mod copula;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod pickands;

pub use error::{Error, Result};
pub use pickands::DependenceFunction;
