//! Exact divisor theory on rational metric graphs, with a constructive and
//! certifiable route from a skeleton (possibly with ends) to a faithful
//! piecewise linear embedding into tropical projective space.
//!
//! Everything is computed over the rationals with arbitrary precision; there
//! are no floating point numbers and no epsilon comparisons anywhere in the
//! crate. The main entry points are:
//!
//! - [`graph::MetricGraph`]: vertex-weighted metric graphs with rational edge
//!   lengths and optional rays (half-infinite edges),
//! - [`divisor::Divisor`] and [`pl::PLFunction`]: divisors and piecewise
//!   linear functions with integer slopes, together with `div`,
//! - [`reduce::reduce_divisor`]: reduced divisors with an equivalence witness
//!   and a replayable transcript,
//! - [`islands::good_effective_divisor`]: effective representatives in a
//!   normal form adapted to the bridge structure of the graph,
//! - [`trop`] and [`synth`]: assembly, verification, and automatic synthesis
//!   of faithful tropicalizations,
//! - [`bounds`]: closed-form degree and dimension bounds,
//! - [`checks`]: seeded randomized invariant suites shared by the command
//!   line self test and the acceptance suite.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod catalog;
pub mod checks;
pub mod divisor;
pub mod format;
pub mod graph;
pub mod islands;
pub mod pl;
pub mod ratio;
pub mod reduce;
pub mod synth;
pub mod trop;
