//! Independent oracles that check the reduction chain end to end.

pub mod budget;
pub mod chain;
pub mod matching;
pub mod sat;

pub use budget::{Meter, SearchBudget};
pub use matching::{count_perfect_matchings, for_each_matching, matchings_at_least, max_cover, max_matching};
pub use sat::{count_sat, measure_sat_stability, SatCount, SatStability};
pub use chain::{
    measure_kmeans_stability_margin, measure_matching_stability, verify_chain, ChainBudgets, ChainReport, Check,
    CheckStatus, Verdict,
};
