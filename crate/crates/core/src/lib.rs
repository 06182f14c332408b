//! Engine for sum-product queries (SPQs) over commutative semirings.
//!
//! The crate has three layers:
//!
//! * query representation and exact fractional edge covers ([`query`], [`cover`]),
//! * data: K-relations, tries, and the evaluation algorithms ([`semiring`],
//!   [`data`], [`eval`]),
//! * plans: the GJ / PT / PTC / PTCR / RPT / TD plan classes with their exact
//!   space/time exponents, and plan-space search ([`plan`], [`search`]).
//!
//! All exponent arithmetic is exact rational; evaluation is single-threaded and
//! deterministic, with a per-run [`eval::ResourceMeter`] counting steps and
//! live auxiliary cells so the claimed exponents can be checked empirically.

pub mod cover;
pub mod data;
pub mod eval;
pub mod fixtures;
pub mod plan;
pub mod query;
pub mod search;
pub mod semiring;

pub use cover::{rat, CardinalityProfile, CoverError, CoverSolver, FractionalEdgeCover, Rat};
pub use query::{parse_query, Atom, Query, QueryError, VarId, VarSet};
