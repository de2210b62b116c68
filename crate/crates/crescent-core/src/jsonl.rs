//! JSON-lines readers and writers shared by the stage checkpoint files.
//!
//! Stage files are append-only. A truncated trailing line (no newline, or
//! half-written JSON at the end of the file) is dropped with a warning so
//! an interrupted run can resume; corruption anywhere else aborts.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Read all records. Missing file returns an empty vec.
pub fn read_all<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut pending_error: Option<(usize, String)> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        // A parse error is fatal unless it turns out to be the last line.
        if let Some((bad_line, detail)) = pending_error.take() {
            return Err(Error::CorruptCheckpoint {
                path: path.to_path_buf(),
                line: bad_line,
                detail,
            });
        }
        match serde_json::from_str(&line) {
            Ok(record) => records.push(record),
            Err(e) => pending_error = Some((idx + 1, e.to_string())),
        }
    }
    if let Some((line, detail)) = pending_error {
        log::warn!(
            "{}:{line}: dropping truncated trailing line ({detail})",
            path.display()
        );
    }
    Ok(records)
}

/// Append-mode writer that flushes each record to disk as it is written.
pub struct JsonlWriter {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl JsonlWriter {
    pub fn append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(JsonlWriter {
            path: path.to_path_buf(),
            writer: BufWriter::new(file),
        })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::io(&self.path, std::io::Error::other(e)))?;
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.write_all(b"\n"))
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Write a whole file atomically: temp file in the same directory, then
/// rename over the destination. No partially-written file is ever visible
/// at `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
    ));
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Serialize records to JSONL bytes (one compact JSON object per line).
pub fn to_jsonl_bytes<T: Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::io("<memory>", std::io::Error::other(e)))?;
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}
