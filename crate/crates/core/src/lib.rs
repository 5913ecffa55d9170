//! Solvers for the index deployment ordering problem: choose the order in
//! which to build a set of database indexes so that the area under the
//! workload-runtime-versus-deployment-time curve is as small as possible.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`]: problem data, validation, canonical form, JSON format.
//! - [`model`] and [`eval`]: lookup tables, full and incremental objective.
//! - [`constraints`] and [`analysis`]: ordering knowledge derived from the
//!   problem structure, iterated to a fixpoint.
//! - [`search`]: first-fail branch-and-prune search and a brute-force oracle.
//! - [`heuristics`]: interaction-guided greedy and min-cut scheduling.
//! - [`local`]: tabu search, large and variable neighborhood search.
//! - [`gen`]: seeded synthetic instances and property fixtures.

// `!(x > 0.0)` is deliberate: NaN has to fail these checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod clock;
pub mod constraints;
pub mod error;
pub mod eval;
pub mod gen;
pub mod graph;
pub mod heuristics;
pub mod instance;
pub mod local;
pub mod model;
pub mod search;
pub mod stats;

pub use analysis::{analyze, AnalysisOptions, AnalysisReport};
pub use constraints::ConstraintSet;
pub use error::{Error, Result};
pub use eval::{build_cost, evaluate, runtime_after, swap_delta, Deployment, EvalResult, PrefixState};
pub use instance::{IndexId, Instance, PlanId, QueryId, ValidationReport, Violation, ViolationCode};
pub use model::Model;
pub use search::{brute_force, solve_exact, SearchLimits, SearchOutcome};
pub use stats::SearchStats;
