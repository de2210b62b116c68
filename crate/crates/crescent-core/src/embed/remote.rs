//! Remote embeddings over an OpenAI-compatible `/embeddings` endpoint, plus
//! an append-only JSONL disk cache keyed by text hash.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::{l2_normalize, Embedder};
use crate::error::{Error, Result};
use crate::gateway::{CallError, BACKOFF_FACTOR, MAX_ATTEMPTS};
use crate::jsonl::JsonlWriter;

pub struct HttpEmbedder {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    dimension: usize,
    retry_base: Duration,
    retries: AtomicU64,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct WireResponse {
    data: Vec<WireItem>,
}

#[derive(Deserialize)]
struct WireItem {
    index: usize,
    embedding: Vec<f32>,
}

impl HttpEmbedder {
    pub fn new(
        endpoint: &str,
        model: &str,
        api_key_env: &str,
        dimension: usize,
        retry_base_ms: u64,
    ) -> Self {
        let trimmed = endpoint.trim_end_matches('/');
        let url = if trimmed.ends_with("/embeddings") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/embeddings")
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .expect("http client construction");
        let api_key = std::env::var(api_key_env).ok().filter(|k| !k.is_empty());
        HttpEmbedder {
            client,
            url,
            model: model.to_string(),
            api_key,
            dimension,
            retry_base: Duration::from_millis(retry_base_ms),
            retries: AtomicU64::new(0),
        }
    }

    fn call_once(&self, texts: &[String]) -> std::result::Result<Vec<Vec<f32>>, CallError> {
        let body = WireRequest { model: &self.model, input: texts };
        let mut http_req = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            http_req = http_req.bearer_auth(key);
        }
        let resp = http_req.send().map_err(|e| {
            if e.is_timeout() || e.is_connect() {
                CallError::Retryable(format!("request to {} failed: {e}", self.url))
            } else {
                CallError::Malformed(format!("request to {} failed: {e}", self.url))
            }
        })?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(CallError::Auth(status.as_u16()));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(CallError::Retryable(format!("http {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            let head: String = text.chars().take(200).collect();
            return Err(CallError::Malformed(format!("http {status}: {head}")));
        }
        let parsed: WireResponse = resp
            .json()
            .map_err(|e| CallError::Malformed(format!("decoding embeddings body: {e}")))?;
        if parsed.data.len() != texts.len() {
            return Err(CallError::Malformed(format!(
                "response has {} embeddings, expected {}",
                parsed.data.len(),
                texts.len()
            )));
        }
        let mut out: Vec<Option<Vec<f32>>> = vec![None; texts.len()];
        for item in parsed.data {
            let slot = out.get_mut(item.index).ok_or_else(|| {
                CallError::Malformed(format!("embedding index {} out of range", item.index))
            })?;
            if slot.is_some() {
                return Err(CallError::Malformed(format!(
                    "duplicate embedding index {}",
                    item.index
                )));
            }
            *slot = Some(item.embedding);
        }
        out.into_iter()
            .map(|v| v.ok_or_else(|| CallError::Malformed("missing embedding index".into())))
            .collect()
    }
}

impl Embedder for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let mut last_detail = String::new();
        for attempt in 1..=MAX_ATTEMPTS {
            match self.call_once(texts) {
                Ok(mut vectors) => {
                    for v in &mut vectors {
                        if v.len() != self.dimension {
                            return Err(Error::DimensionMismatch {
                                expected: self.dimension,
                                got: v.len(),
                            });
                        }
                        l2_normalize(v);
                    }
                    return Ok(vectors);
                }
                Err(CallError::Retryable(detail)) => {
                    last_detail = detail;
                    if attempt < MAX_ATTEMPTS {
                        self.retries.fetch_add(1, Ordering::Relaxed);
                        let backoff = self.retry_base * BACKOFF_FACTOR.pow(attempt - 1) as u32;
                        log::warn!(
                            "transient embeddings failure (attempt {attempt}/{MAX_ATTEMPTS}): {last_detail}; backing off {backoff:?}"
                        );
                        std::thread::sleep(backoff);
                    }
                }
                Err(CallError::Auth(status)) => return Err(Error::AuthFailed { status }),
                Err(CallError::Malformed(detail)) => return Err(Error::MalformedResponse(detail)),
                Err(CallError::Script(detail)) => return Err(Error::MockScript(detail)),
            }
        }
        Err(Error::EndpointUnreachable { attempts: MAX_ATTEMPTS, detail: last_detail })
    }

    fn retries_total(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }
}

/// Full SHA-256 of the text, hex-encoded; the disk cache key.
pub fn text_key(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    text_hash: String,
    vector: Vec<f32>,
}

struct CacheState {
    map: HashMap<String, Vec<f32>>,
    writer: JsonlWriter,
}

/// Wraps a remote embedder with an append-only JSONL cache so repeated runs
/// (and resumed runs) never re-embed a text they have seen before.
pub struct CachedEmbedder {
    inner: Box<dyn Embedder>,
    state: Mutex<CacheState>,
}

impl CachedEmbedder {
    pub fn open(inner: Box<dyn Embedder>, path: &Path) -> Result<Self> {
        let entries: Vec<CacheEntry> = crate::jsonl::read_all(path)?;
        let mut map = HashMap::with_capacity(entries.len());
        for e in entries {
            if e.vector.len() != inner.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: inner.dimension(),
                    got: e.vector.len(),
                });
            }
            map.insert(e.text_hash, e.vector);
        }
        let writer = JsonlWriter::append(path)?;
        Ok(CachedEmbedder { inner, state: Mutex::new(CacheState { map, writer }) })
    }
}

impl Embedder for CachedEmbedder {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        let keys: Vec<String> = texts.iter().map(|t| text_key(t)).collect();
        let mut out: Vec<Option<Vec<f32>>> = vec![None; texts.len()];
        let mut miss_idx: Vec<usize> = Vec::new();
        {
            let state = self.state.lock().unwrap();
            for (i, key) in keys.iter().enumerate() {
                match state.map.get(key) {
                    Some(v) => out[i] = Some(v.clone()),
                    None => miss_idx.push(i),
                }
            }
        }
        if !miss_idx.is_empty() {
            let miss_texts: Vec<String> = miss_idx.iter().map(|&i| texts[i].clone()).collect();
            let vectors = self.inner.embed(&miss_texts)?;
            let mut state = self.state.lock().unwrap();
            for (&i, v) in miss_idx.iter().zip(vectors.into_iter()) {
                state.writer.write(&CacheEntry { text_hash: keys[i].clone(), vector: v.clone() })?;
                state.map.insert(keys[i].clone(), v.clone());
                out[i] = Some(v);
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every slot filled")).collect())
    }

    fn retries_total(&self) -> u64 {
        self.inner.retries_total()
    }
}
