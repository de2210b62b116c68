//! Deterministic scripted backend. A JSONL script maps requests to canned
//! completions so entire pipeline runs replay byte-for-byte without a model
//! server.
//!
//! Each line is one entry:
//!
//! ```json
//! {"fingerprint": "7f3a9c01d2e4b688", "completions": ["text one", "text two"]}
//! {"match_rule": "contains:modify the latter", "completions": ["rewritten"]}
//! {"match_rule": "always", "completions": ["fallback"]}
//! ```
//!
//! Exactly one of `fingerprint` / `match_rule` must be present. A
//! `fingerprint` is matched against [`CompletionRequest::fingerprint`];
//! `match_rule` is either `contains:<substring>` (tested against the last
//! message's content) or `always`. Lookup prefers fingerprints, then rules
//! in file order.
//!
//! Entries sharing a key form a FIFO queue: each call consumes the front
//! entry, except the final entry, which is sticky and answers all further
//! calls. A request for `n` samples takes the first `n` completions of the
//! selected entry and fails the script if fewer are present.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{CallError, CompletionBackend, CompletionRequest};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub match_rule: Option<String>,
    pub completions: Vec<String>,
}

impl ScriptEntry {
    pub fn by_fingerprint(fp: impl Into<String>, completions: Vec<String>) -> Self {
        ScriptEntry { fingerprint: Some(fp.into()), match_rule: None, completions }
    }

    pub fn by_contains(substr: impl AsRef<str>, completions: Vec<String>) -> Self {
        ScriptEntry {
            fingerprint: None,
            match_rule: Some(format!("contains:{}", substr.as_ref())),
            completions,
        }
    }

    pub fn always(completions: Vec<String>) -> Self {
        ScriptEntry { fingerprint: None, match_rule: Some("always".to_string()), completions }
    }
}

#[derive(Debug, Clone)]
enum Rule {
    Contains(String),
    Always,
}

impl Rule {
    fn parse(s: &str) -> Result<Rule> {
        if s == "always" {
            Ok(Rule::Always)
        } else if let Some(sub) = s.strip_prefix("contains:") {
            if sub.is_empty() {
                Err(Error::MockScript("contains: rule with empty substring".into()))
            } else {
                Ok(Rule::Contains(sub.to_string()))
            }
        } else {
            Err(Error::MockScript(format!(
                "unknown match_rule {s:?} (expected \"contains:<substring>\" or \"always\")"
            )))
        }
    }

    fn matches(&self, req: &CompletionRequest) -> bool {
        match self {
            Rule::Always => true,
            Rule::Contains(sub) => {
                req.messages.last().map(|m| m.content.contains(sub.as_str())).unwrap_or(false)
            }
        }
    }
}

struct RuleQueue {
    rule: Rule,
    queue: VecDeque<Vec<String>>,
}

struct ScriptState {
    by_fingerprint: HashMap<String, VecDeque<Vec<String>>>,
    rules: Vec<RuleQueue>,
}

pub struct MockBackend {
    state: Mutex<ScriptState>,
}

impl MockBackend {
    pub fn load(path: &Path) -> Result<Self> {
        let entries: Vec<ScriptEntry> = crate::jsonl::read_all(path)?;
        if entries.is_empty() {
            return Err(Error::MockScript(format!("script {} has no entries", path.display())));
        }
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<ScriptEntry>) -> Result<Self> {
        let mut by_fingerprint: HashMap<String, VecDeque<Vec<String>>> = HashMap::new();
        let mut rules: Vec<RuleQueue> = Vec::new();
        for (i, e) in entries.into_iter().enumerate() {
            if e.completions.is_empty() {
                return Err(Error::MockScript(format!("entry {} has no completions", i + 1)));
            }
            match (e.fingerprint, e.match_rule) {
                (Some(fp), None) => {
                    by_fingerprint.entry(fp).or_default().push_back(e.completions);
                }
                (None, Some(rule_str)) => {
                    let rule = Rule::parse(&rule_str)?;
                    // Consecutive identical rules share one queue so entries
                    // written in file order are consumed in file order.
                    let key_matches = |rq: &RuleQueue| match (&rq.rule, &rule) {
                        (Rule::Always, Rule::Always) => true,
                        (Rule::Contains(a), Rule::Contains(b)) => a == b,
                        _ => false,
                    };
                    if let Some(rq) = rules.iter_mut().find(|rq| key_matches(rq)) {
                        rq.queue.push_back(e.completions);
                    } else {
                        rules.push(RuleQueue { rule, queue: VecDeque::from([e.completions]) });
                    }
                }
                (Some(_), Some(_)) => {
                    return Err(Error::MockScript(format!(
                        "entry {} sets both fingerprint and match_rule",
                        i + 1
                    )));
                }
                (None, None) => {
                    return Err(Error::MockScript(format!(
                        "entry {} sets neither fingerprint nor match_rule",
                        i + 1
                    )));
                }
            }
        }
        Ok(MockBackend { state: Mutex::new(ScriptState { by_fingerprint, rules }) })
    }

    /// Pops the front entry unless it is the last one, which stays sticky.
    fn take(queue: &mut VecDeque<Vec<String>>) -> Vec<String> {
        if queue.len() > 1 {
            queue.pop_front().expect("non-empty queue")
        } else {
            queue.front().expect("non-empty queue").clone()
        }
    }
}

/// Test support: delegates to an inner backend until a budget of successful
/// calls is spent, then fails every call. Simulates a run dying mid-flight
/// so checkpoint/resume behavior can be exercised in-process.
pub struct FailAfter {
    inner: Box<dyn CompletionBackend>,
    remaining: Mutex<u64>,
}

impl FailAfter {
    pub fn new(inner: Box<dyn CompletionBackend>, successes: u64) -> Self {
        FailAfter { inner, remaining: Mutex::new(successes) }
    }
}

impl CompletionBackend for FailAfter {
    fn complete(&self, req: &CompletionRequest) -> std::result::Result<Vec<String>, CallError> {
        let mut remaining = self.remaining.lock().unwrap();
        if *remaining == 0 {
            return Err(CallError::Script("injected failure: call budget spent".into()));
        }
        let out = self.inner.complete(req)?;
        *remaining -= 1;
        Ok(out)
    }
}

impl CompletionBackend for MockBackend {
    fn complete(&self, req: &CompletionRequest) -> std::result::Result<Vec<String>, CallError> {
        let mut state = self.state.lock().unwrap();
        let fp = req.fingerprint();
        let completions = if let Some(queue) = state.by_fingerprint.get_mut(&fp) {
            Self::take(queue)
        } else if let Some(rq) = state.rules.iter_mut().find(|rq| rq.rule.matches(req)) {
            Self::take(&mut rq.queue)
        } else {
            let tail = req
                .messages
                .last()
                .map(|m| m.content.chars().take(80).collect::<String>())
                .unwrap_or_default();
            return Err(CallError::Script(format!(
                "no script entry for fingerprint {fp} (last message starts {tail:?})"
            )));
        };
        let n = req.n_samples as usize;
        if completions.len() < n {
            return Err(CallError::Script(format!(
                "script entry for fingerprint {fp} has {} completions, request needs {n}",
                completions.len()
            )));
        }
        Ok(completions[..n].to_vec())
    }
}
