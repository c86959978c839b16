//! Piecewise-polynomial densities inside a hybrid probabilistic logic program.
//!
//! This crate holds the algorithmic half of `hybridpp`:
//!
//! * [`poly`]: univariate and multivariate (piecewise) polynomials with exact
//!   definite integration over intervals and boxes.
//! * [`discretize`]: equal-width, equal-frequency and supervised
//!   entropy-distance cutpoints.
//! * [`density`]: B-spline mixtures fitted by EM, BIC scoring and the grid
//!   search over bin counts, binning methods and polynomial degrees.
//! * [`program`]: the AST, parser and printer for the ProbLog-style language
//!   with polynomial-weighted continuous facts.
//! * [`engine`]: grounding, domain partitioning and exact success
//!   probabilities by enumeration.
//! * [`transform`]: hybrid to discrete program conversion and rule-learning
//!   task construction.
//! * [`rulelearn`]: FOIL-style rule induction on expected counts.
//!
//! The crate is `#![no_std]` and only needs `alloc`. File formats, CSV input
//! and the command line live in the `hybridpp` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(a <= b)` style comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod density;
pub mod discretize;
pub mod engine;
pub mod poly;
pub mod program;
pub mod rulelearn;
pub mod transform;

pub use error::{Error, Result};
