//! Unfolding engine for safe Petri nets.
//!
//! The crate builds classical finite complete prefixes of 1-safe Petri net
//! unfoldings and goal-driven finite prefixes that skip transitions a
//! pluggable reduction procedure declares useless for reaching a goal, while
//! preserving every minimal configuration that reaches it. A brute-force
//! oracle over firing sequences provides the reference semantics used by the
//! test suites.

mod bits;

pub mod cli;
pub mod format;
pub mod goal_driven;
pub mod net;
pub mod occurrence;
pub mod oracle;
pub mod reduction;
pub mod unfolder;

#[cfg(test)]
pub(crate) mod testutil;

pub use goal_driven::{gd_prefix, gd_unfold, Strategy};
pub use net::{Goal, GoalMode, Marking, Net, NetError, PlaceId, SafeNet, SafetyReport, TransId};
pub use occurrence::{Configuration, Prefix};
pub use unfolder::{complete_prefix, PrefixStats};
