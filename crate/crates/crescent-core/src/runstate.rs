//! Run-directory layout and resume plumbing. A run directory is fully
//! described by its config snapshot plus numbered stage files; every stage
//! file is an append-only JSONL checkpoint whose lines form a contiguous
//! prefix of that stage's work, so a killed run restarts exactly where the
//! last complete record left off.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::jsonl::JsonlWriter;

pub const CONFIG_SNAPSHOT: &str = "config.snapshot.json";
pub const STAGE_RAW: &str = "01_raw.jsonl";
pub const STAGE_DEDUP: &str = "02_dedup.jsonl";
pub const STAGE_CANDIDATES: &str = "03_candidates.jsonl";
pub const STAGE_VOTES: &str = "04_votes.jsonl";
pub const DATASET_SFT: &str = "dataset.sft.jsonl";
pub const EMBEDDINGS_CSV: &str = "embeddings.csv";
pub const STATS_JSON: &str = "stats.json";
pub const EVAL_RECORDS: &str = "eval_records.jsonl";
pub const EVAL_SUMMARY: &str = "eval_summary.json";

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Creates the directory and settles which config governs the run. A
    /// fresh directory gets `cfg` written as its snapshot; an existing
    /// snapshot wins over `cfg` so a run's parameters cannot drift across
    /// resumes. (Backend *connections* are the caller's: the pipeline
    /// builds its backend from the invocation config before calling this,
    /// so a resume may point at a replacement endpoint.)
    pub fn prepare(&self, cfg: &PipelineConfig) -> Result<PipelineConfig> {
        std::fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
        let snapshot_path = self.path(CONFIG_SNAPSHOT);
        if snapshot_path.exists() {
            let text = std::fs::read_to_string(&snapshot_path)
                .map_err(|e| Error::io(&snapshot_path, e))?;
            let snapshot = PipelineConfig::from_snapshot_json(&text)?;
            if snapshot != *cfg {
                log::warn!(
                    "resuming {} with its config snapshot; differing pipeline settings are \
                     ignored (backend connection settings follow this invocation)",
                    self.root.display()
                );
            }
            Ok(snapshot)
        } else {
            crate::jsonl::write_atomic(&snapshot_path, cfg.to_snapshot_json().as_bytes())?;
            Ok(cfg.clone())
        }
    }

    /// Loads the snapshot of an existing run directory.
    pub fn load_snapshot(&self) -> Result<PipelineConfig> {
        let snapshot_path = self.path(CONFIG_SNAPSHOT);
        let text = std::fs::read_to_string(&snapshot_path).map_err(|e| {
            Error::Config(format!("{} is not a run directory: {e}", self.root.display()))
        })?;
        PipelineConfig::from_snapshot_json(&text)
    }
}

/// Writes records keyed by a dense sequence number, flushing only the
/// contiguous prefix. Concurrent workers may finish out of order; the file
/// on disk still grows strictly in order, which is what makes truncation
/// the only possible corruption and resume a simple line count.
pub struct OrderedSink<T: Serialize> {
    writer: JsonlWriter,
    next: usize,
    pending: BTreeMap<usize, T>,
}

impl<T: Serialize> OrderedSink<T> {
    /// `start` is the sequence number of the first record this sink will
    /// receive (records before it are already on disk).
    pub fn new(writer: JsonlWriter, start: usize) -> Self {
        OrderedSink { writer, next: start, pending: BTreeMap::new() }
    }

    pub fn open(path: &Path, start: usize) -> Result<Self> {
        Ok(Self::new(JsonlWriter::append(path)?, start))
    }

    /// Accepts the record for sequence `seq`, writing it and any newly
    /// contiguous successors.
    pub fn push(&mut self, seq: usize, record: T) -> Result<()> {
        if seq < self.next || self.pending.contains_key(&seq) {
            return Err(Error::InconsistentRecord(format!(
                "sequence {seq} written twice (next expected {})",
                self.next
            )));
        }
        self.pending.insert(seq, record);
        while let Some(record) = self.pending.remove(&self.next) {
            self.writer.write(&record)?;
            self.next += 1;
        }
        Ok(())
    }

    /// Sequence number the file is complete up to (exclusive).
    pub fn flushed_up_to(&self) -> usize {
        self.next
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }
}
