//! Benchmark evaluation under the dual-extractor protocol: a completion is
//! correct when the marker extractor or the last-number extractor recovers
//! the gold answer. Few-shot exemplars are drawn from a held-out pool (or
//! from the benchmark itself, excluding the item under test) using the
//! item's own RNG stream, and per-item results are checkpointed so an
//! interrupted evaluation resumes where it stopped.

use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decimal::{canonical_equal, CanonicalAnswer, DecimalValue};
use crate::error::{Error, Result};
use crate::extract::{extract_last_number, extract_marker};
use crate::gateway::{CompletionRequest, Gateway};
use crate::runstate::OrderedSink;
use crate::seeding::{question_rng, DOMAIN_EVAL};

/// One benchmark problem: the question, its full reference solution, and
/// the gold answer recovered from the solution's `####` marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub question: String,
    pub answer: String,
    pub gold: DecimalValue,
}

#[derive(Deserialize)]
struct RawBenchmarkRow {
    question: String,
    answer: String,
}

/// Loads a benchmark JSONL file of `{question, answer}` rows; the gold
/// answer must be extractable from each solution via the `####` marker.
pub fn load_benchmark(path: &Path) -> Result<Vec<BenchmarkItem>> {
    let rows: Vec<RawBenchmarkRow> = crate::jsonl::read_all(path)?;
    if rows.is_empty() {
        return Err(Error::Config(format!("benchmark {} has no items", path.display())));
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| match extract_marker(&row.answer) {
            CanonicalAnswer::Numeric { value } => {
                Ok(BenchmarkItem { question: row.question, answer: row.answer, gold: value })
            }
            CanonicalAnswer::Unextractable => Err(Error::InconsistentRecord(format!(
                "benchmark item {} has no extractable gold answer",
                i + 1
            ))),
        })
        .collect()
}

/// Draws `k` distinct exemplars from `pool`, skipping `exclude` (the item
/// under test when the pool is the benchmark itself). Selection is a
/// partial Fisher-Yates shuffle so results depend only on the rng stream.
pub fn select_exemplars<'a>(
    pool: &'a [BenchmarkItem],
    exclude: Option<usize>,
    k: usize,
    rng: &mut impl Rng,
) -> Result<Vec<&'a BenchmarkItem>> {
    let mut indices: Vec<usize> =
        (0..pool.len()).filter(|i| Some(*i) != exclude).collect();
    if indices.len() < k {
        return Err(Error::InsufficientTrainPool { need: k, have: indices.len() });
    }
    for j in 0..k {
        let pick = rng.gen_range(j..indices.len());
        indices.swap(j, pick);
    }
    Ok(indices[..k].iter().map(|&i| &pool[i]).collect())
}

fn exemplar_block(items: &[&BenchmarkItem]) -> String {
    items
        .iter()
        .map(|e| format!("Question: {}\nAnswer: {}", e.question, e.answer))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Renders the evaluation prompt. Zero-shot without a template is the bare
/// question; few-shot uses Question:/Answer: blocks with the reference
/// solutions as worked examples.
pub fn build_eval_prompt(
    target_question: &str,
    exemplars: &[&BenchmarkItem],
    template: Option<&str>,
) -> String {
    match template {
        Some(t) => t
            .replace(crate::config::PLACEHOLDER_EXEMPLARS, &exemplar_block(exemplars))
            .replace(crate::config::PLACEHOLDER_QUESTION, target_question),
        None if exemplars.is_empty() => target_question.to_string(),
        None => format!(
            "{}\n\nQuestion: {}\nAnswer:",
            exemplar_block(exemplars),
            target_question
        ),
    }
}

/// Per-item result row; the evaluation checkpoint record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub index: usize,
    pub gold: DecimalValue,
    pub completion: String,
    pub marker: CanonicalAnswer,
    pub last_number: CanonicalAnswer,
    pub marker_correct: bool,
    pub last_number_correct: bool,
    pub correct: bool,
}

/// Applies both extractors to a completion and scores it against gold.
pub fn score_completion(index: usize, completion: String, gold: &DecimalValue) -> EvalRecord {
    let gold_answer = CanonicalAnswer::numeric(gold.clone());
    let marker = extract_marker(&completion);
    let last_number = extract_last_number(&completion);
    let marker_correct = canonical_equal(&marker, &gold_answer);
    let last_number_correct = canonical_equal(&last_number, &gold_answer);
    EvalRecord {
        index,
        gold: gold.clone(),
        completion,
        marker,
        last_number,
        marker_correct,
        last_number_correct,
        correct: marker_correct || last_number_correct,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub marker_correct: usize,
    pub last_number_correct: usize,
    pub shots: u32,
    pub resumed_items: usize,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub shots: u32,
    pub temperature: f64,
    pub max_tokens: u32,
    pub rng_seed: u64,
    pub eval_template: Option<String>,
    pub max_in_flight: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            shots: 0,
            temperature: 0.0,
            max_tokens: 1024,
            rng_seed: 0,
            eval_template: None,
            max_in_flight: 4,
        }
    }
}

/// Evaluates every benchmark item, checkpointing one record per item to
/// `records_path`. Existing records are trusted and skipped, so rerunning
/// after an interruption completes the remaining items only.
pub fn run_eval(
    gateway: &Gateway,
    items: &[BenchmarkItem],
    train_pool: Option<&[BenchmarkItem]>,
    opts: &EvalOptions,
    records_path: &Path,
) -> Result<EvalSummary> {
    let existing: Vec<EvalRecord> = crate::jsonl::read_all(records_path)?;
    if existing.len() > items.len() {
        return Err(Error::InconsistentRecord(format!(
            "{} eval records for {} benchmark items",
            existing.len(),
            items.len()
        )));
    }
    for (i, rec) in existing.iter().enumerate() {
        if rec.index != i {
            return Err(Error::InconsistentRecord(format!(
                "eval record {} holds index {}, expected {i}",
                i + 1,
                rec.index
            )));
        }
    }
    let resumed_items = existing.len();
    let done = existing.len();
    let total = items.len();
    drop(existing);

    // Items run concurrently up to max_in_flight; the sink restores
    // benchmark order so the records file is identical to a sequential run.
    if done < total {
        let sink = Mutex::new(OrderedSink::<EvalRecord>::open(records_path, done)?);
        let next = AtomicUsize::new(done);
        let abort = AtomicBool::new(false);
        let workers = opts.max_in_flight.min(total - done).max(1);
        let (tx, rx) = mpsc::channel::<(usize, Result<EvalRecord>)>();

        let mut first_err: Option<Error> = None;
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                let abort = &abort;
                scope.spawn(move || loop {
                    if abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= total {
                        break;
                    }
                    let item = &items[i];
                    let outcome: Result<EvalRecord> = (|| {
                        let mut rng = question_rng(opts.rng_seed, i as u64, DOMAIN_EVAL);
                        let exemplars = match train_pool {
                            Some(pool) => {
                                select_exemplars(pool, None, opts.shots as usize, &mut rng)?
                            }
                            None => {
                                select_exemplars(items, Some(i), opts.shots as usize, &mut rng)?
                            }
                        };
                        let prompt = build_eval_prompt(
                            &item.question,
                            &exemplars,
                            opts.eval_template.as_deref(),
                        );
                        let completions = gateway.complete(&CompletionRequest::single_user(
                            prompt,
                            opts.temperature,
                            opts.max_tokens,
                        ))?;
                        Ok(score_completion(
                            i,
                            completions.into_iter().next().expect("one completion"),
                            &item.gold,
                        ))
                    })();
                    if outcome.is_err() {
                        abort.store(true, Ordering::SeqCst);
                    }
                    if tx.send((i, outcome)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);

            for (i, outcome) in rx {
                match outcome {
                    Ok(record) => {
                        if let Err(e) = sink.lock().unwrap().push(i, record) {
                            abort.store(true, Ordering::SeqCst);
                            first_err.get_or_insert(e);
                        }
                    }
                    Err(e) => {
                        first_err.get_or_insert(e);
                    }
                }
            }
        });
        if let Some(e) = first_err {
            return Err(e);
        }
    }

    let records: Vec<EvalRecord> = crate::jsonl::read_all(records_path)?;
    let correct = records.iter().filter(|r| r.correct).count();
    Ok(EvalSummary {
        total: records.len(),
        correct,
        accuracy: correct as f64 / records.len() as f64,
        marker_correct: records.iter().filter(|r| r.marker_correct).count(),
        last_number_correct: records.iter().filter(|r| r.last_number_correct).count(),
        shots: opts.shots,
        resumed_items,
    })
}
