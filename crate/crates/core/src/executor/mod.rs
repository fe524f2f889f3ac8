//! Query graph evaluation, lattice exploration and answer ranking.

pub mod explore;
pub mod join;
pub mod scoring;

pub use explore::{
    explore, rank_answers, AnswerRecord, EarlyStop, ExploreConfig, Exploration, ScoredResult, Strategy, Witness,
    MAX_WITNESSES,
};
pub use join::{evaluate_chain, extend, AnswerTable, JoinConfig};
pub use scoring::{c_score, is_identical, match_credit, s_score};
