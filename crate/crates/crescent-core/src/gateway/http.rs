//! OpenAI-compatible chat-completions backend over blocking HTTP.
//!
//! The endpoint may be given as a base URL (`http://host:8000/v1`) or as the
//! full path ending in `/chat/completions`. Timeouts, connection failures,
//! HTTP 429 and 5xx are reported as retryable; 401/403 as auth failures;
//! everything else as malformed.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::gateway::{CallError, CompletionBackend, CompletionRequest};

pub struct HttpBackend {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    /// When false, a request for n samples is issued as n sequential
    /// single-sample calls (for servers that ignore the `n` field).
    native_multi_sample: bool,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [crate::gateway::ChatMessage],
    temperature: f64,
    n: u32,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: Option<String>,
}

impl HttpBackend {
    pub fn new(
        endpoint: &str,
        model: &str,
        api_key_env: &str,
        timeout_secs: u64,
        native_multi_sample: bool,
    ) -> Self {
        let trimmed = endpoint.trim_end_matches('/');
        let url = if trimmed.ends_with("/chat/completions") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/chat/completions")
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(timeout_secs))
            .build()
            .expect("http client construction");
        let api_key = std::env::var(api_key_env).ok().filter(|k| !k.is_empty());
        HttpBackend { client, url, model: model.to_string(), api_key, native_multi_sample }
    }

    fn call_once(&self, req: &CompletionRequest, n: u32) -> Result<Vec<String>, CallError> {
        let body = WireRequest {
            model: &self.model,
            messages: &req.messages,
            temperature: req.temperature,
            n,
            max_tokens: req.max_tokens,
        };
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
        let parsed: WireResponse = resp.json().map_err(|e| {
            if e.is_timeout() {
                CallError::Retryable(format!("reading response body: {e}"))
            } else {
                CallError::Malformed(format!("decoding response body: {e}"))
            }
        })?;
        if parsed.choices.len() != n as usize {
            return Err(CallError::Malformed(format!(
                "response has {} choices, expected {n}",
                parsed.choices.len()
            )));
        }
        Ok(parsed
            .choices
            .into_iter()
            .map(|c| c.message.content.unwrap_or_default())
            .collect())
    }
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<Vec<String>, CallError> {
        if self.native_multi_sample || req.n_samples == 1 {
            self.call_once(req, req.n_samples)
        } else {
            let mut out = Vec::with_capacity(req.n_samples as usize);
            for _ in 0..req.n_samples {
                out.extend(self.call_once(req, 1)?);
            }
            Ok(out)
        }
    }
}
