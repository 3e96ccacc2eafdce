//! Normalized Delivery Time (NDT) analysis for a fog radio access network
//! with two edge nodes (ENs), two users and per-file cache allocations.
//!
//! The library computes the high-SNR delivery latency region of such a
//! network in four layers:
//!
//! - [`model`] — domain types (system parameters, cache partition matrices,
//!   demands, NDT points, popularity profiles) and the symmetrization
//!   transform.
//! - [`closed_form`] — exact costs of the four constituent delivery
//!   strategies (HT, ZF, ST+ZF, X-IA) and the closed-form achievable and
//!   converse NDT bounds.
//! - [`planner`] — explicit cache placements and delivery plans (bit-interval
//!   assignments to strategy phases) realizing the achievable bounds, plan
//!   verification, and convex plan mixing by file splitting.
//! - [`bounds`] — independent verification of the converse: the five-halfplane
//!   constraint polytope in (edge NDT, fronthaul NDT) and an exact 2-variable
//!   LP solved by vertex enumeration, plus the dual-combination
//!   reconstruction of each converse component.
//! - [`optimizer`] — two-class region slices, popularity-weighted average
//!   latency trade-offs and Pareto envelope extraction.
//! - [`suites`] — the self-check suites driven by the `verify` CLI
//!   subcommand and the acceptance tests.
//!
//! All quantities are dimensionless: file size is normalized to 1.0 and all
//! intervals and payload sizes are fractions of the file length. Comparisons
//! use the absolute tolerance [`TOL`]; everything of interest is a small
//! rational, so binary64 keeps golden values exact to far below tolerance.
//!
//! All types are immutable after construction and all operations are pure,
//! so the whole library is safe for concurrent use.

pub mod bounds;
pub mod closed_form;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod planner;
pub mod suites;

pub use error::Error;

/// Absolute comparison tolerance used throughout the library.
pub const TOL: f64 = 1e-9;

pub type Result<T> = std::result::Result<T, Error>;
