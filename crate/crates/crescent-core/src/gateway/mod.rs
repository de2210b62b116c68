//! Model gateway: a backend-agnostic chat-completion interface with
//! bounded concurrency, retry with exponential backoff, and a stable
//! request fingerprint used by the scripted mock backend.

pub mod http;
pub mod mock;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAX_ATTEMPTS: u32 = 5;
pub const BACKOFF_FACTOR: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".to_string(), content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".to_string(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub n_samples: u32,
    pub max_tokens: u32,
}

impl CompletionRequest {
    pub fn single_user(text: impl Into<String>, temperature: f64, max_tokens: u32) -> Self {
        CompletionRequest {
            messages: vec![ChatMessage::user(text)],
            temperature,
            n_samples: 1,
            max_tokens,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.messages.is_empty() {
            return Err(Error::Config("completion request has no messages".into()));
        }
        if self.n_samples < 1 {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        Ok(())
    }

    /// Stable 64-bit fingerprint of (messages, temperature, n_samples),
    /// rendered as 16 lowercase hex characters. The canonical encoding is
    /// length-prefixed so that no two distinct requests share bytes:
    ///
    /// ```text
    /// u32le msg_count
    ///   { u32le role_len, role bytes, u32le content_len, content bytes }*
    /// f64le temperature bits
    /// u32le n_samples
    /// ```
    ///
    /// The digest is SHA-256 truncated to its first 8 bytes.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.messages.len() as u32).to_le_bytes());
        for m in &self.messages {
            hasher.update((m.role.len() as u32).to_le_bytes());
            hasher.update(m.role.as_bytes());
            hasher.update((m.content.len() as u32).to_le_bytes());
            hasher.update(m.content.as_bytes());
        }
        hasher.update(self.temperature.to_le_bytes());
        hasher.update(self.n_samples.to_le_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(16);
        for b in &digest[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// How a single backend call failed; decides retry behavior.
#[derive(Debug, Clone)]
pub enum CallError {
    /// Timeout, connection failure, HTTP 429 or 5xx.
    Retryable(String),
    /// HTTP 401/403; retrying cannot help.
    Auth(u16),
    /// Response arrived but could not be interpreted.
    Malformed(String),
    /// Scripted mock had no entry or too few completions.
    Script(String),
}

pub trait CompletionBackend: Send + Sync {
    /// Returns exactly `req.n_samples` completion texts.
    fn complete(&self, req: &CompletionRequest) -> std::result::Result<Vec<String>, CallError>;
}

/// Counting semaphore bounding in-flight backend calls.
struct Semaphore {
    permits: Mutex<usize>,
    cond: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore { permits: Mutex::new(permits), cond: Condvar::new() }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut n = self.permits.lock().unwrap();
        while *n == 0 {
            n = self.cond.wait(n).unwrap();
        }
        *n -= 1;
        SemaphoreGuard { sem: self }
    }

    fn release(&self) {
        let mut n = self.permits.lock().unwrap();
        *n += 1;
        self.cond.notify_one();
    }
}

struct SemaphoreGuard<'a> {
    sem: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        self.sem.release();
    }
}

/// Shared front door for all model calls. Enforces the in-flight cap,
/// retries transient failures with exponential backoff, and counts the
/// retries it performs so they can be reported in run stats.
pub struct Gateway {
    backend: Box<dyn CompletionBackend>,
    semaphore: Semaphore,
    retry_base: Duration,
    retries: AtomicU64,
    /// Test hook: when false, backoff sleeps are skipped.
    sleep_enabled: bool,
}

impl Gateway {
    pub fn new(backend: Box<dyn CompletionBackend>, max_in_flight: usize, retry_base_ms: u64) -> Self {
        Gateway {
            backend,
            semaphore: Semaphore::new(max_in_flight.max(1)),
            retry_base: Duration::from_millis(retry_base_ms),
            retries: AtomicU64::new(0),
            sleep_enabled: true,
        }
    }

    /// Disables backoff sleeps; retry accounting is unchanged.
    pub fn without_sleep(mut self) -> Self {
        self.sleep_enabled = false;
        self
    }

    /// Total transient-failure retries performed so far.
    pub fn retries_total(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<Vec<String>> {
        req.validate()?;
        let _permit = self.semaphore.acquire();
        let mut last_detail = String::new();
        for attempt in 1..=MAX_ATTEMPTS {
            match self.backend.complete(req) {
                Ok(texts) => {
                    if texts.len() != req.n_samples as usize {
                        return Err(Error::MalformedResponse(format!(
                            "backend returned {} completions, expected {}",
                            texts.len(),
                            req.n_samples
                        )));
                    }
                    return Ok(texts);
                }
                Err(CallError::Retryable(detail)) => {
                    last_detail = detail;
                    if attempt < MAX_ATTEMPTS {
                        self.retries.fetch_add(1, Ordering::Relaxed);
                        let backoff = self.retry_base * BACKOFF_FACTOR.pow(attempt - 1) as u32;
                        log::warn!(
                            "transient backend failure (attempt {attempt}/{MAX_ATTEMPTS}): {last_detail}; backing off {backoff:?}"
                        );
                        if self.sleep_enabled {
                            std::thread::sleep(backoff);
                        }
                    }
                }
                Err(CallError::Auth(status)) => return Err(Error::AuthFailed { status }),
                Err(CallError::Malformed(detail)) => return Err(Error::MalformedResponse(detail)),
                Err(CallError::Script(detail)) => return Err(Error::MockScript(detail)),
            }
        }
        Err(Error::EndpointUnreachable { attempts: MAX_ATTEMPTS, detail: last_detail })
    }
}
