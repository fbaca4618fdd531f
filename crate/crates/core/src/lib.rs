//! Exact local search for perturbation-stable discrete clustering, plus
//! parsimonious reduction gadgets and the brute-force oracles that check them.

pub mod cli;
pub mod combin;
pub mod error;
pub mod exact;
pub mod generators;
pub mod local_search;
pub mod metric;
pub mod oracle;
pub mod reductions;
pub mod verify;

pub use error::{Error, Result};
pub use metric::{Assignment, Cost, MetricInstance, Objective, Solution};
