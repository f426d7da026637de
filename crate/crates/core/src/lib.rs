//! Routing and isoperimetry toolkit for the directed boolean hypercube.
//!
//! The directed hypercube on `{0,1}^d` orients every edge from the endpoint
//! of lower Hamming weight to the endpoint of higher weight.  On top of that
//! graph this crate provides:
//!
//! * exact combinatorial primitives: layers, the subset partial order,
//!   coordinate projections, and cover graphs ([`hypercube`]);
//! * matched pairs of vertex sets, directed volume, and exact-rational
//!   separation distance ([`matched_pairs`]);
//! * integral max-flow / min-cut with simultaneous vertex and edge
//!   capacities, dual certificates, cut normalization, and
//!   complementary-slackness verification ([`flow`]);
//! * disjoint-path route systems between levels, single and doubled, plus
//!   the gateway / pink-edge diagnostics used to probe failed routings
//!   ([`lr_routing`]);
//! * monotonicity analysis of boolean functions: violated edges, directed
//!   influence, distance to monotonicity, vertex-disjoint violation
//!   matchings, and Talagrand-style square-root objectives
//!   ([`monotonicity`]);
//! * theorem checkers and counterexample-search harnesses with
//!   deterministic, replayable reports ([`conjectures`]).
//!
//! All quantities that are rational in exact arithmetic are represented as
//! [`Rational`]; floating point appears only in square-root sums.

pub mod conjectures;
pub mod flow;
pub mod hypercube;
pub mod lr_routing;
pub mod matched_pairs;
pub mod monotonicity;

mod error;
mod matching;

pub use error::Error;

/// Exact rational number used for distances, densities, and ratios.
pub type Rational = num::rational::Ratio<i64>;
