//! Deterministic answer extraction from free-form model output.
//!
//! Two extractors: one reads the number after the last `####` marker, the
//! other takes the last number token anywhere in the text. Both are total:
//! every string yields `Numeric` or `Unextractable`, never a crash.
//!
//! Number token grammar: optional sign, digits with optional comma
//! thousands-groups, optional decimal point and fraction digits. A leading
//! `$` and a trailing `%` are stripped; commas are removed before parsing.

use once_cell::sync::Lazy;
use regex::Regex;

use crate::decimal::{CanonicalAnswer, DecimalValue};

const MARKER: &str = "####";

static NUMBER_TOKEN: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"[-+]?\$?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?%?").unwrap()
});

fn parse_token(token: &str) -> Option<DecimalValue> {
    let cleaned: String = token
        .chars()
        .filter(|c| !matches!(c, ',' | '$'))
        .take_while(|c| *c != '%')
        .collect();
    DecimalValue::parse(&cleaned)
}

/// Number after the last `####` marker, or `Unextractable`.
pub fn extract_marker(text: &str) -> CanonicalAnswer {
    let Some(pos) = text.rfind(MARKER) else {
        return CanonicalAnswer::Unextractable;
    };
    let tail = &text[pos + MARKER.len()..];
    match NUMBER_TOKEN.find(tail).and_then(|m| parse_token(m.as_str())) {
        Some(value) => CanonicalAnswer::numeric(value),
        None => CanonicalAnswer::Unextractable,
    }
}

/// Last number token anywhere in the text, or `Unextractable`.
pub fn extract_last_number(text: &str) -> CanonicalAnswer {
    let last = NUMBER_TOKEN
        .find_iter(text)
        .last()
        .and_then(|m| parse_token(m.as_str()));
    match last {
        Some(value) => CanonicalAnswer::numeric(value),
        None => CanonicalAnswer::Unextractable,
    }
}

/// Marker extractor first, last-number fallback. This is the single
/// canonical value used to group answers for voting.
pub fn extract_cascade(text: &str) -> CanonicalAnswer {
    let marker = extract_marker(text);
    if marker.is_numeric() {
        marker
    } else {
        extract_last_number(text)
    }
}
