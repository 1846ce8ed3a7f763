//! Clustering of colored points under a diversity constraint: every cluster
//! must contain at least `l` points, all of pairwise-distinct colors, and the
//! objective is to minimize the largest cluster radius.
//!
//! The crate provides:
//! - a factor-2 solver driven by a threshold scan over edge weights
//!   ([`solver::solve`]),
//! - an exact bottleneck-matching solver for two-color instances
//!   ([`two_color::solve_two_color`]),
//! - a constant-factor solver that suppresses the minimum number of outliers
//!   when no feasible clustering exists ([`outlier::solve_with_outliers`]),
//! - exponential-time exact oracles for desk-scale verification
//!   ([`oracle::exact_solve`], [`oracle::exact_solve_outliers`]),
//! - seeded instance generators, including an adversarial family built from
//!   3-dimensional-matching gadgets ([`gen`]).

pub mod flow;
pub mod gen;
pub mod instance;
pub mod matching;
pub mod oracle;
pub mod outlier;
pub mod solver;
pub mod two_color;

#[cfg(test)]
pub(crate) mod test_util;

pub use instance::{evaluate, Clustering, Instance, ThresholdGraph};
