//! Shared domain types for the pipeline. All of them are immutable after
//! construction and safe to share across threads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decimal::{CanonicalAnswer, DecimalValue};
use crate::extract::extract_cascade;

/// Whether a question still carries its original text or was rewritten
/// during deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Raw,
    Modified,
}

/// A generated problem statement. Ids are assigned in generation order and
/// unique within a run; `origin == Modified` iff `retry_count >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: u64,
    pub text: String,
    pub origin: Origin,
    pub retry_count: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub embedding: Option<Vec<f32>>,
}

impl Question {
    /// A freshly generated question. Text is whitespace-trimmed; empty text
    /// is rejected by the caller before construction.
    pub fn raw(id: u64, text: impl Into<String>) -> Self {
        Question {
            id,
            text: text.into().trim().to_string(),
            origin: Origin::Raw,
            retry_count: 0,
            embedding: None,
        }
    }

    /// Replace the text with a deduplication rewrite, keeping the id.
    pub fn rewritten(&self, text: impl Into<String>) -> Self {
        Question {
            id: self.id,
            text: text.into().trim().to_string(),
            origin: Origin::Modified,
            retry_count: self.retry_count + 1,
            embedding: None,
        }
    }
}

/// One sampled chain-of-thought answer for a question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerCandidate {
    pub question_id: u64,
    pub sample_index: usize,
    pub text: String,
    pub canonical: CanonicalAnswer,
}

impl AnswerCandidate {
    /// `canonical` is always the extraction cascade applied to `text`.
    pub fn from_text(question_id: u64, sample_index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        let canonical = extract_cascade(&text);
        AnswerCandidate {
            question_id,
            sample_index,
            text,
            canonical,
        }
    }
}

/// Outcome of majority voting over the answer candidates of one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub question_id: u64,
    /// Occurrence count per numeric answer class, keyed by canonical value.
    pub class_counts: BTreeMap<DecimalValue, u32>,
    pub winner: CanonicalAnswer,
    pub winner_count: u32,
    pub tie_size: u32,
    pub selected_sample_index: usize,
    pub excluded_unextractable: u32,
}

/// Final (question, answer) unit of the emitted dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAPair {
    pub question: Question,
    pub answer_text: String,
    pub vote: VoteRecord,
}
