//! Simulation designs, replicate generation, and rank-statistic aggregation.

pub mod config;
pub mod generate;
pub mod runner;
pub mod stats;

pub use config::{CoefScheme, CovariateDist, Link, Noise, SimConfig, Truth, NAMED_SIMULATIONS};
pub use generate::{gen_sim, SimDraw};
pub use runner::{parse_method, run_replications, MethodResult, RepStats, SimResult, Summary};
pub use stats::{
    rank_stats_interaction, rank_stats_marginal, InteractionRanks, InteractionSummary, MarginalRanks,
    MarginalSummary,
};
