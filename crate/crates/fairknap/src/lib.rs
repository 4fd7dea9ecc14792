//! Fair knapsack-constrained monotone submodular maximization.
//!
//! The problem: given ground elements with weights and colors, a knapsack
//! budget `B`, and per-color fairness intervals `(l_i, u_i]`, pick a subset
//! `S` maximizing a monotone submodular `f(S)` subject to `w(S) <= B` and
//! `l_i < |S ∩ G_i| <= u_i` for every color group `G_i`.
//!
//! The crate provides:
//!
//! * [`model`] — instances, validation, feasibility, the fractional
//!   relaxation polytope, and a seeded random instance generator;
//! * [`submodular`] — objective oracles (coverage, modular, saturating),
//!   the multilinear extension (exact and sampled), gradient estimation,
//!   and a submodularity checker;
//! * [`fractional`] — exact linear maximization over the fair knapsack
//!   polytope and the continuous greedy ascent;
//! * [`rounding`] — weight-preserving randomized pipage rounding,
//!   group-sum-preserving pipage rounding, and a Monte-Carlo harness that
//!   measures marginals, pairwise correlations, and constraint violations;
//! * [`truncation`] — the knapsack-truncating reduction, its feasibility
//!   extension, and the end-to-end enumerate/solve/extend pipeline;
//! * [`relaxed`] — pipelines for the two single-sided relaxations
//!   (fairness holds exactly / knapsack holds exactly, the other side in
//!   expectation);
//! * [`oracle`] — brute-force optima and feasible-set enumeration for
//!   desk-scale verification.

pub mod error;
pub mod fixtures;
pub mod fractional;
mod lp;
pub mod model;
pub mod oracle;
pub mod relaxed;
pub mod rounding;
pub mod seeding;
pub mod set;
pub mod stats;
pub mod submodular;
pub mod truncation;

pub use error::{Error, Result};
pub use model::{Element, FractionalVector, GroupBound, Instance, IntegralSolution};
pub use set::ElementSet;
pub use submodular::Objective;
