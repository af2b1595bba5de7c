//! Feature screening for ultrahigh-dimensional predictors against a
//! multivariate response, built on generalized correlation matrices.

pub mod baselines;
pub mod data;
pub mod error;
pub mod io;
pub mod moments;
pub mod norm;
pub mod pipeline;
pub mod report;
pub mod screen;
pub mod sim;
pub mod topk;

pub use baselines::{dcsis_screen, sirs_screen};
pub use data::Dataset;
pub use error::{Error, Result};
pub use moments::{build_moment_cache, MomentCache};
pub use norm::NormSpec;
pub use report::{rank_of, threshold_select, Method, ModelSet, ScreenMeta, ScreenReport, UtilityScore};
pub use pipeline::{iterative_screen, run_pipeline, saicc, PipelineConfig};
pub use screen::{screen_interactions, screen_marginal, InteractionOptions};
pub use sim::{gen_sim, run_replications, SimConfig};
