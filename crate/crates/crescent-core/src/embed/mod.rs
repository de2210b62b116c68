//! Text embedding: a remote embeddings endpoint with a disk cache, and a
//! fully local hashed bag-of-tokens fallback. All vectors are L2-normalized
//! before use so the duplicate threshold means the same thing under either
//! backend.

pub mod fallback;
pub mod remote;

use crate::config::{EmbeddingBackendKind, EmbeddingSection};
use crate::error::{Error, Result};

pub use fallback::HashedBagEmbedder;
pub use remote::{CachedEmbedder, HttpEmbedder};

/// L2 distance with f64 accumulation.
pub fn l2_distance(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len(), "distance over mismatched dimensions");
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = *x as f64 - *y as f64;
        acc += d * d;
    }
    acc.sqrt()
}

pub fn l2_norm(v: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for x in v {
        acc += (*x as f64) * (*x as f64);
    }
    acc.sqrt()
}

/// Scales `v` to unit norm; zero vectors get a deterministic basis vector.
pub fn l2_normalize(v: &mut [f32]) {
    let norm = l2_norm(v);
    if norm == 0.0 {
        if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        return;
    }
    for x in v.iter_mut() {
        *x = ((*x as f64) / norm) as f32;
    }
}

pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;

    /// One unit-norm vector of `dimension()` entries per input text.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>>;

    /// Transient-failure retries performed so far (remote backends only).
    fn retries_total(&self) -> u64 {
        0
    }
}

/// Builds the embedder selected by the config section.
pub fn build_embedder(cfg: &EmbeddingSection, retry_base_ms: u64) -> Result<Box<dyn Embedder>> {
    match cfg.backend {
        EmbeddingBackendKind::Fallback => Ok(Box::new(HashedBagEmbedder::new(cfg.dimension))),
        EmbeddingBackendKind::Http => {
            let endpoint = cfg.endpoint.as_deref().ok_or_else(|| {
                Error::Config("embedding.endpoint is required for the http backend".into())
            })?;
            let http = HttpEmbedder::new(
                endpoint,
                &cfg.model,
                &cfg.api_key_env,
                cfg.dimension,
                retry_base_ms,
            );
            match &cfg.cache_path {
                Some(path) => Ok(Box::new(CachedEmbedder::open(Box::new(http), path)?)),
                None => Ok(Box::new(http)),
            }
        }
    }
}
