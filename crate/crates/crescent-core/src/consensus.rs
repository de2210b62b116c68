//! Consensus enhancement: sample m chain-of-thought answers per question,
//! group them into numeric answer classes, and keep a completion from the
//! most frequent class. Ties are resolved by one uniform draw from the
//! question's own RNG stream; unextractable samples never vote.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, PLACEHOLDER_QUESTION};
use crate::decimal::CanonicalAnswer;
use crate::domain::{AnswerCandidate, QAPair, Question, VoteRecord};
use crate::error::Result;
use crate::gateway::{CompletionRequest, Gateway};

/// Stage-03 checkpoint record: the full sampled answer set of one question.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateSet {
    pub question_id: u64,
    pub candidates: Vec<AnswerCandidate>,
}

/// Stage-04 checkpoint record: the voting outcome for one question.
/// `kept == false` means every sample was unextractable and the question
/// leaves the dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsensusRecord {
    pub question: Question,
    pub kept: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vote: Option<VoteRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub answer_text: Option<String>,
}

impl ConsensusRecord {
    pub fn into_qa_pair(self) -> Option<QAPair> {
        match (self.kept, self.vote, self.answer_text) {
            (true, Some(vote), Some(answer_text)) => {
                Some(QAPair { question: self.question, answer_text, vote })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VoteOutcome {
    Winner(VoteRecord),
    /// No sample produced a numeric answer.
    AllUnextractable { question_id: u64, samples: usize },
}

/// The prompt sent for answer sampling: the raw question, or the configured
/// template with `{question}` substituted.
pub fn answer_prompt(cfg: &PipelineConfig, question_text: &str) -> String {
    match &cfg.prompts.answer_template {
        Some(t) => t.replace(PLACEHOLDER_QUESTION, question_text),
        None => question_text.to_string(),
    }
}

/// Samples the configured number of answers for one question in a single
/// gateway request.
pub fn sample_answers(
    gateway: &Gateway,
    cfg: &PipelineConfig,
    question: &Question,
) -> Result<CandidateSet> {
    let mut req = CompletionRequest::single_user(
        answer_prompt(cfg, &question.text),
        cfg.run.gen_temperature,
        cfg.generation.answer_max_tokens,
    );
    req.n_samples = cfg.run.samples_per_question as u32;
    let texts = gateway.complete(&req)?;
    let candidates = texts
        .into_iter()
        .enumerate()
        .map(|(i, t)| AnswerCandidate::from_text(question.id, i, t))
        .collect();
    Ok(CandidateSet { question_id: question.id, candidates })
}

/// Majority vote over one question's candidates.
///
/// Classes are canonical numeric values; two samples vote together exactly
/// when their extracted answers are equal as decimals. When several classes
/// share the top count, one is drawn uniformly (classes ordered by first
/// occurrence in the sample list). The kept completion is the earliest
/// sample of the winning class. The rng is consulted only when there is an
/// actual tie.
pub fn vote(question_id: u64, candidates: &[AnswerCandidate], rng: &mut impl Rng) -> VoteOutcome {
    let mut order: Vec<&crate::decimal::DecimalValue> = Vec::new();
    let mut counts: std::collections::BTreeMap<crate::decimal::DecimalValue, u32> =
        std::collections::BTreeMap::new();
    let mut excluded = 0u32;
    for c in candidates {
        match &c.canonical {
            CanonicalAnswer::Numeric { value } => {
                if !counts.contains_key(value) {
                    order.push(value);
                }
                *counts.entry(value.clone()).or_insert(0) += 1;
            }
            CanonicalAnswer::Unextractable => excluded += 1,
        }
    }
    if counts.is_empty() {
        return VoteOutcome::AllUnextractable { question_id, samples: candidates.len() };
    }
    let max_count = *counts.values().max().expect("non-empty counts");
    let tied: Vec<&crate::decimal::DecimalValue> =
        order.iter().copied().filter(|v| counts[*v] == max_count).collect();
    let tie_size = tied.len() as u32;
    let winner_value = if tied.len() == 1 {
        tied[0].clone()
    } else {
        tied[rng.gen_range(0..tied.len())].clone()
    };
    let selected_sample_index = candidates
        .iter()
        .find(|c| match &c.canonical {
            CanonicalAnswer::Numeric { value } => *value == winner_value,
            CanonicalAnswer::Unextractable => false,
        })
        .expect("winning class has at least one sample")
        .sample_index;
    VoteOutcome::Winner(VoteRecord {
        question_id,
        class_counts: counts,
        winner: CanonicalAnswer::numeric(winner_value),
        winner_count: max_count,
        tie_size,
        selected_sample_index,
        excluded_unextractable: excluded,
    })
}

/// Assembles the stage-04 record from a vote outcome.
pub fn conclude(question: Question, set: &CandidateSet, outcome: VoteOutcome) -> ConsensusRecord {
    match outcome {
        VoteOutcome::Winner(vote) => {
            let answer_text = set
                .candidates
                .iter()
                .find(|c| c.sample_index == vote.selected_sample_index)
                .expect("selected sample exists")
                .text
                .clone();
            ConsensusRecord { question, kept: true, vote: Some(vote), answer_text: Some(answer_text) }
        }
        VoteOutcome::AllUnextractable { .. } => {
            ConsensusRecord { question, kept: false, vote: None, answer_text: None }
        }
    }
}
