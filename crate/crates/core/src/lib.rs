//! Bounded multi-objective archives.
//!
//! The crate provides the objective-space primitives, quality indicators,
//! seven truncation policies and the schedules that drive them, plus the
//! experiment harness that compares them by IGD.

pub mod error;
pub mod experiment;
pub mod indicators;
pub mod pareto;
pub mod policies;
pub mod refsets;
pub mod scheduler;
pub mod selftest;
pub mod stats;

pub use error::{Error, Result};
pub use pareto::{dominates, fast_nondominated_sort, nondominated_filter, Archive, Front, ObjectiveVector, Solution};
pub use policies::{PolicyContext, PolicyId};
pub use refsets::{FrontKind, InputSequence, WeightVectorSet};
pub use scheduler::{run_archiving, RunTrace, Schedule};
