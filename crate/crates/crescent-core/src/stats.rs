//! Run statistics. Every count is recomputable from the stage files alone,
//! and the pipeline produces `stats.json` exactly that way, so an offline
//! recomputation always agrees with what the run reported. Wall-clock time
//! and retry totals cannot be recovered from files and live in a separate
//! runtime section.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::consensus::ConsensusRecord;
use crate::dataset::SftRow;
use crate::diversify::DedupRecord;
use crate::domain::{Origin, Question};
use crate::error::{Error, Result};
use crate::runstate::{RunDir, DATASET_SFT, STAGE_DEDUP, STAGE_RAW, STAGE_VOTES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsCounts {
    pub target_question_count: u64,
    pub samples_per_question: u64,
    pub diversify_enabled: bool,
    pub consensus_enabled: bool,
    pub raw_questions: u64,
    pub dedup_processed: u64,
    pub dedup_accepted: u64,
    pub dedup_dropped: u64,
    /// Rewrite calls across all questions, successful or not.
    pub dedup_rewrites: u64,
    /// Accepted questions whose final text is a rewrite.
    pub accepted_modified: u64,
    pub consensus_processed: u64,
    pub consensus_kept: u64,
    /// Questions dropped because every sample was unextractable.
    pub consensus_dropped: u64,
    /// Votes where the winning class held every sample.
    pub unanimous_votes: u64,
    /// Votes decided by a uniform draw among tied classes.
    pub tied_votes: u64,
    pub excluded_unextractable: u64,
    pub dataset_pairs: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRuntime {
    pub wall_clock_ms: u64,
    pub gateway_retries: u64,
    pub embedding_retries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub counts: StatsCounts,
    pub runtime: StatsRuntime,
}

/// Recomputes every count from the run directory's stage files. Missing
/// stage files contribute zeros, so partially completed runs still report.
pub fn recompute_counts(run: &RunDir) -> Result<StatsCounts> {
    let cfg = run.load_snapshot()?;
    let effective_m = if cfg.run.consensus { cfg.run.samples_per_question as u64 } else { 1 };

    let raw: Vec<Question> = crate::jsonl::read_all(&run.path(STAGE_RAW))?;
    let dedup: Vec<DedupRecord> = if cfg.run.diversify {
        crate::jsonl::read_all(&run.path(STAGE_DEDUP))?
    } else {
        Vec::new()
    };
    let votes: Vec<ConsensusRecord> = crate::jsonl::read_all(&run.path(STAGE_VOTES))?;
    let rows: Vec<SftRow> = crate::jsonl::read_all(&run.path(DATASET_SFT))?;

    let dedup_accepted = dedup.iter().filter(|r| r.accepted).count() as u64;
    let kept: Vec<&ConsensusRecord> = votes.iter().filter(|r| r.kept).collect();

    Ok(StatsCounts {
        target_question_count: cfg.run.target_question_count,
        samples_per_question: effective_m,
        diversify_enabled: cfg.run.diversify,
        consensus_enabled: cfg.run.consensus,
        raw_questions: raw.len() as u64,
        dedup_processed: dedup.len() as u64,
        dedup_accepted,
        dedup_dropped: dedup.len() as u64 - dedup_accepted,
        dedup_rewrites: dedup.iter().map(|r| r.question.retry_count as u64).sum(),
        accepted_modified: dedup
            .iter()
            .filter(|r| r.accepted && r.question.origin == Origin::Modified)
            .count() as u64,
        consensus_processed: votes.len() as u64,
        consensus_kept: kept.len() as u64,
        consensus_dropped: votes.len() as u64 - kept.len() as u64,
        unanimous_votes: kept
            .iter()
            .filter_map(|r| r.vote.as_ref())
            .filter(|v| v.winner_count as u64 == effective_m)
            .count() as u64,
        tied_votes: kept
            .iter()
            .filter_map(|r| r.vote.as_ref())
            .filter(|v| v.tie_size > 1)
            .count() as u64,
        excluded_unextractable: kept
            .iter()
            .filter_map(|r| r.vote.as_ref())
            .map(|v| v.excluded_unextractable as u64)
            .sum(),
        dataset_pairs: rows.len() as u64,
    })
}

pub fn write_stats(path: &Path, report: &StatsReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InconsistentRecord(format!("stats serialize: {e}")))?;
    text.push('\n');
    crate::jsonl::write_atomic(path, text.as_bytes())
}

pub fn load_stats(path: &Path) -> Result<StatsReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InconsistentRecord(format!("{}: {e}", path.display())))
}
