//! Final artifacts: the SFT-ready dataset and the embeddings CSV export.
//! Both are derived deterministically from stage files and written
//! atomically, so rebuilding them is always safe.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::consensus::ConsensusRecord;
use crate::domain::Origin;
use crate::error::{Error, Result};

/// One dataset line, ready for supervised fine-tuning. `answer` is the
/// winning chain-of-thought completion verbatim; `gold` is the canonical
/// numeric answer it voted for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRow {
    pub id: u64,
    pub question: String,
    pub answer: String,
    pub gold: String,
    pub origin: Origin,
    pub winner_count: u32,
    pub tie_size: u32,
}

/// Projects kept consensus records onto dataset rows, preserving order.
pub fn sft_rows(records: &[ConsensusRecord]) -> Vec<SftRow> {
    records
        .iter()
        .filter(|r| r.kept)
        .map(|r| {
            let vote = r.vote.as_ref().expect("kept record has a vote");
            SftRow {
                id: r.question.id,
                question: r.question.text.clone(),
                answer: r.answer_text.clone().expect("kept record has an answer"),
                gold: vote.winner.to_string(),
                origin: r.question.origin,
                winner_count: vote.winner_count,
                tie_size: vote.tie_size,
            }
        })
        .collect()
}

/// Atomically (re)writes the dataset file.
pub fn write_sft(path: &Path, rows: &[SftRow]) -> Result<()> {
    crate::jsonl::write_atomic(path, &crate::jsonl::to_jsonl_bytes(rows)?)
}

/// Atomically writes `id,d0,...,dN` rows, floats in scientific notation
/// with five fractional digits.
pub fn write_embeddings_csv(path: &Path, entries: &[(u64, Vec<f32>)], dimension: usize) -> Result<()> {
    let mut out = String::new();
    out.push_str("id");
    for d in 0..dimension {
        out.push_str(&format!(",d{d}"));
    }
    out.push('\n');
    for (id, vector) in entries {
        if vector.len() != dimension {
            return Err(Error::DimensionMismatch { expected: dimension, got: vector.len() });
        }
        out.push_str(&id.to_string());
        for x in vector {
            out.push_str(&format!(",{x:.5e}"));
        }
        out.push('\n');
    }
    crate::jsonl::write_atomic(path, out.as_bytes())
}

/// Parses an embeddings CSV back into (id, vector) pairs.
pub fn read_embeddings_csv(path: &Path) -> Result<Vec<(u64, Vec<f32>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InconsistentRecord(format!("{} is empty", path.display())))?;
    if !header.starts_with("id,") {
        return Err(Error::InconsistentRecord(format!(
            "{} missing id header, found {header:?}",
            path.display()
        )));
    }
    let dimension = header.split(',').count() - 1;
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse_err = |what: &str| {
            Error::InconsistentRecord(format!(
                "{} line {}: bad {what}",
                path.display(),
                lineno + 2
            ))
        };
        let id: u64 = fields
            .next()
            .ok_or_else(|| parse_err("id"))?
            .parse()
            .map_err(|_| parse_err("id"))?;
        let vector: Vec<f32> = fields
            .map(|f| f.parse::<f32>().map_err(|_| parse_err("float")))
            .collect::<Result<_>>()?;
        if vector.len() != dimension {
            return Err(Error::DimensionMismatch { expected: dimension, got: vector.len() });
        }
        out.push((id, vector));
    }
    Ok(out)
}
