//! Synthetic QA generation pipeline: bait-prompt question elicitation,
//! embedding-based rejection-sampling deduplication, majority-vote answer
//! consensus, and math-word-problem evaluation with a dual-extractor
//! correctness rule.

pub mod config;
pub mod consensus;
pub mod dataset;
pub mod decimal;
pub mod diversify;
pub mod domain;
pub mod embed;
pub mod error;
pub mod eval;
pub mod extract;
pub mod gateway;
pub mod index;
pub mod jsonl;
pub mod pipeline;
pub mod runstate;
pub mod seeding;
pub mod stats;

#[cfg(test)]
pub(crate) mod testutil;

pub use config::PipelineConfig;
pub use decimal::{canonical_equal, CanonicalAnswer, DecimalValue};
pub use domain::{AnswerCandidate, Origin, QAPair, Question, VoteRecord};
pub use error::{Error, Result};
pub use pipeline::{build_backend, synthesize, synthesize_with_backend};
pub use stats::StatsReport;
