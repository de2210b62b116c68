//! Pipeline configuration: TOML file on disk, JSON snapshot inside a run
//! directory. Defaults are the recommended generation settings
//! (m=5 samples, temperature 0.95, L2 threshold 0.25).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BAIT_PROMPT: &str =
    "Generate a diverse math word problem requiring multi-step reasoning";
pub const DEFAULT_DEDUP_TEMPLATE: &str =
    "{existing} is very similar to {current}, please modify the latter to make it different.";

/// Placeholder for the earlier accepted question in the dedup template.
pub const PLACEHOLDER_EXISTING: &str = "{existing}";
/// Placeholder for the question being rewritten in the dedup template.
pub const PLACEHOLDER_CURRENT: &str = "{current}";
/// Placeholder for the question text in answer/eval templates.
pub const PLACEHOLDER_QUESTION: &str = "{question}";
/// Placeholder for the rendered few-shot block in the eval template.
pub const PLACEHOLDER_EXEMPLARS: &str = "{exemplars}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub run: RunSection,
    pub prompts: PromptSection,
    pub generation: GenerationSection,
    pub embedding: EmbeddingSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            run: RunSection::default(),
            prompts: PromptSection::default(),
            generation: GenerationSection::default(),
            embedding: EmbeddingSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    /// Number of raw questions to collect (n).
    pub target_question_count: u64,
    /// Answer samples per question (m).
    pub samples_per_question: usize,
    pub gen_temperature: f64,
    /// L2 distance threshold below which a question counts as a duplicate.
    pub theta: f64,
    /// Rewrite attempts before a colliding question is dropped.
    pub max_dedup_retries: u32,
    pub rng_seed: u64,
    pub diversify: bool,
    pub consensus: bool,
    pub max_in_flight: usize,
    /// Questions expected per bait call; >1 splits numbered lists.
    pub questions_per_call: usize,
    pub output_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            target_question_count: 100,
            samples_per_question: 5,
            gen_temperature: 0.95,
            theta: 0.25,
            max_dedup_retries: 8,
            rng_seed: 0,
            diversify: true,
            consensus: true,
            max_in_flight: 4,
            questions_per_call: 1,
            output_dir: PathBuf::from("crescent-run"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptSection {
    pub bait: String,
    /// Two placeholders: `{existing}` (accepted neighbor) and `{current}`
    /// (the question to rewrite).
    pub dedup_template: String,
    /// Optional wrapper around the question for answer sampling,
    /// with a `{question}` placeholder. Absent = question text verbatim.
    pub answer_template: Option<String>,
    /// Optional evaluation prompt override with `{exemplars}` and
    /// `{question}` placeholders.
    pub eval_template: Option<String>,
}

impl Default for PromptSection {
    fn default() -> Self {
        PromptSection {
            bait: DEFAULT_BAIT_PROMPT.to_string(),
            dedup_template: DEFAULT_DEDUP_TEMPLATE.to_string(),
            answer_template: None,
            eval_template: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    HttpOpenaiCompatible,
    ScriptedMock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationSection {
    pub backend: BackendKind,
    pub endpoint: Option<String>,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub mock_script: Option<PathBuf>,
    pub question_max_tokens: u32,
    pub answer_max_tokens: u32,
    pub timeout_secs: u64,
    /// Use the protocol's native n-samples field; false issues n
    /// sequential single-sample calls.
    pub native_multi_sample: bool,
    pub retry_base_ms: u64,
}

impl Default for GenerationSection {
    fn default() -> Self {
        GenerationSection {
            backend: BackendKind::HttpOpenaiCompatible,
            endpoint: None,
            model: "default".to_string(),
            api_key_env: "CRESCENT_API_KEY".to_string(),
            mock_script: None,
            question_max_tokens: 512,
            answer_max_tokens: 1024,
            timeout_secs: 120,
            native_multi_sample: true,
            retry_base_ms: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingBackendKind {
    Fallback,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingSection {
    pub backend: EmbeddingBackendKind,
    pub endpoint: Option<String>,
    pub model: String,
    pub api_key_env: String,
    pub dimension: usize,
    /// Disk cache for remote embeddings, keyed by text hash.
    pub cache_path: Option<PathBuf>,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            backend: EmbeddingBackendKind::Fallback,
            endpoint: None,
            model: "default".to_string(),
            api_key_env: "CRESCENT_API_KEY".to_string(),
            dimension: 384,
            cache_path: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if r.target_question_count < 1 {
            return Err(Error::Config("target_question_count must be >= 1".into()));
        }
        if r.samples_per_question < 1 {
            return Err(Error::Config("samples_per_question must be >= 1".into()));
        }
        if r.theta < 0.0 || !r.theta.is_finite() {
            return Err(Error::Config("theta must be a finite value >= 0".into()));
        }
        if r.gen_temperature <= 0.0 {
            return Err(Error::Config("gen_temperature must be > 0".into()));
        }
        if r.max_in_flight < 1 {
            return Err(Error::Config("max_in_flight must be >= 1".into()));
        }
        if r.questions_per_call < 1 {
            return Err(Error::Config("questions_per_call must be >= 1".into()));
        }
        if !self.prompts.dedup_template.contains(PLACEHOLDER_EXISTING)
            || !self.prompts.dedup_template.contains(PLACEHOLDER_CURRENT)
        {
            return Err(Error::Config(format!(
                "dedup_template must contain {PLACEHOLDER_EXISTING} and {PLACEHOLDER_CURRENT}"
            )));
        }
        if let Some(t) = &self.prompts.answer_template {
            if !t.contains(PLACEHOLDER_QUESTION) {
                return Err(Error::Config(format!(
                    "answer_template must contain {PLACEHOLDER_QUESTION}"
                )));
            }
        }
        if let Some(t) = &self.prompts.eval_template {
            if !t.contains(PLACEHOLDER_QUESTION) {
                return Err(Error::Config(format!(
                    "eval_template must contain {PLACEHOLDER_QUESTION}"
                )));
            }
        }
        match self.generation.backend {
            BackendKind::HttpOpenaiCompatible => {
                if self.generation.endpoint.is_none() {
                    return Err(Error::Config(
                        "generation.endpoint is required for the http backend".into(),
                    ));
                }
            }
            BackendKind::ScriptedMock => {
                if self.generation.mock_script.is_none() {
                    return Err(Error::Config(
                        "generation.mock_script is required for the scripted mock backend".into(),
                    ));
                }
            }
        }
        if self.embedding.backend == EmbeddingBackendKind::Http && self.embedding.endpoint.is_none()
        {
            return Err(Error::Config(
                "embedding.endpoint is required for the http backend".into(),
            ));
        }
        if self.embedding.dimension < 1 {
            return Err(Error::Config("embedding.dimension must be >= 1".into()));
        }
        Ok(())
    }

    /// JSON snapshot written into the run directory before any stage runs.
    pub fn to_snapshot_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_snapshot_json(s: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(s)
            .map_err(|e| Error::Config(format!("invalid config snapshot: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
