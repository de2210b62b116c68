//! Deduplication by rejection sampling. Each question is embedded and
//! compared against every previously accepted question; a nearest neighbor
//! strictly closer than theta marks it as a duplicate, and the model is
//! asked to rewrite it until it clears the threshold or the rewrite budget
//! runs out.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, PLACEHOLDER_CURRENT, PLACEHOLDER_EXISTING};
use crate::domain::Question;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::gateway::{CompletionRequest, Gateway};
use crate::index::VectorIndex;

/// Audit row for one question passing through deduplication; stage-02
/// checkpoint record. `question.text` is the final accepted text, or the
/// last rejected attempt for dropped questions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DedupRecord {
    pub question: Question,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nearest_id: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nearest_distance: Option<f64>,
}

/// Renders the rewrite instruction for a colliding question.
pub fn render_dedup_prompt(template: &str, existing: &str, current: &str) -> String {
    template.replace(PLACEHOLDER_EXISTING, existing).replace(PLACEHOLDER_CURRENT, current)
}

pub struct Diversifier<'a> {
    embedder: &'a dyn Embedder,
    gateway: &'a Gateway,
    index: VectorIndex,
    accepted_texts: HashMap<u64, String>,
    theta: f64,
    max_rewrites: u32,
    template: String,
    temperature: f64,
    max_tokens: u32,
}

impl<'a> Diversifier<'a> {
    pub fn new(embedder: &'a dyn Embedder, gateway: &'a Gateway, cfg: &PipelineConfig) -> Self {
        Diversifier {
            embedder,
            gateway,
            index: VectorIndex::new(embedder.dimension()),
            accepted_texts: HashMap::new(),
            theta: cfg.run.theta,
            max_rewrites: cfg.run.max_dedup_retries,
            template: cfg.prompts.dedup_template.clone(),
            temperature: cfg.run.gen_temperature,
            max_tokens: cfg.generation.question_max_tokens,
        }
    }

    pub fn accepted_count(&self) -> usize {
        self.index.len()
    }

    /// Rebuilds state from a previously accepted question (resume path).
    /// The stored embedding is reused verbatim.
    pub fn seed_accepted(&mut self, q: &Question) -> Result<()> {
        let emb = q
            .embedding
            .clone()
            .ok_or(Error::MissingEmbedding { question_id: q.id })?;
        self.index.insert(q.id, emb)?;
        self.accepted_texts.insert(q.id, q.text.clone());
        Ok(())
    }

    /// Runs the accept/rewrite loop for one question. Questions must be
    /// processed in ascending id order for runs to be reproducible.
    pub fn process(&mut self, question: Question) -> Result<DedupRecord> {
        let mut current = question;
        loop {
            let embedding = self
                .embedder
                .embed(std::slice::from_ref(&current.text))?
                .remove(0);
            current.embedding = Some(embedding.clone());

            let nearest = self.index.nearest(&embedding);
            let collision = match &nearest {
                Some(n) => n.distance < self.theta,
                None => false,
            };
            if !collision {
                self.index.insert(current.id, embedding)?;
                self.accepted_texts.insert(current.id, current.text.clone());
                return Ok(DedupRecord {
                    question: current,
                    accepted: true,
                    nearest_id: nearest.map(|n| n.id),
                    nearest_distance: nearest.map(|n| n.distance),
                });
            }
            let nearest = nearest.expect("collision implies a neighbor");
            if current.retry_count >= self.max_rewrites {
                log::info!(
                    "question {} dropped after {} rewrites (nearest {} at {:.4})",
                    current.id,
                    current.retry_count,
                    nearest.id,
                    nearest.distance
                );
                return Ok(DedupRecord {
                    question: current,
                    accepted: false,
                    nearest_id: Some(nearest.id),
                    nearest_distance: Some(nearest.distance),
                });
            }
            let existing = self
                .accepted_texts
                .get(&nearest.id)
                .expect("accepted neighbor has stored text");
            let prompt = render_dedup_prompt(&self.template, existing, &current.text);
            let texts = self.gateway.complete(&CompletionRequest::single_user(
                prompt,
                self.temperature,
                self.max_tokens,
            ))?;
            let rewrite = texts[0].trim();
            if rewrite.is_empty() {
                return Err(Error::EmptyRewrite { question_id: current.id });
            }
            current = current.rewritten(rewrite);
        }
    }
}
