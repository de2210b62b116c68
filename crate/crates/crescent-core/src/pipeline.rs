//! End-to-end synthesis: bait-prompt question generation, deduplication,
//! consensus answer voting, and artifact emission, all checkpointed into a
//! run directory so any interruption resumes without repeating completed
//! model calls.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use once_cell::sync::Lazy;
use regex::Regex;

use crate::config::{BackendKind, PipelineConfig};
use crate::consensus::{conclude, sample_answers, vote, CandidateSet, ConsensusRecord};
use crate::diversify::{DedupRecord, Diversifier};
use crate::domain::Question;
use crate::embed::{build_embedder, Embedder};
use crate::error::{Error, Result};
use crate::gateway::http::HttpBackend;
use crate::gateway::mock::MockBackend;
use crate::gateway::{CompletionBackend, CompletionRequest, Gateway};
use crate::jsonl::JsonlWriter;
use crate::runstate::{
    OrderedSink, RunDir, DATASET_SFT, EMBEDDINGS_CSV, STAGE_CANDIDATES, STAGE_DEDUP, STAGE_RAW,
    STAGE_VOTES, STATS_JSON,
};
use crate::seeding::{question_rng, DOMAIN_VOTE};
use crate::stats::{recompute_counts, write_stats, StatsReport, StatsRuntime};

/// Builds the completion backend selected by the config.
pub fn build_backend(cfg: &PipelineConfig) -> Result<Box<dyn CompletionBackend>> {
    match cfg.generation.backend {
        BackendKind::ScriptedMock => {
            let path = cfg
                .generation
                .mock_script
                .as_ref()
                .ok_or_else(|| Error::Config("mock backend without mock_script".into()))?;
            Ok(Box::new(MockBackend::load(path)?))
        }
        BackendKind::HttpOpenaiCompatible => {
            let endpoint = cfg
                .generation
                .endpoint
                .as_deref()
                .ok_or_else(|| Error::Config("http backend without endpoint".into()))?;
            Ok(Box::new(HttpBackend::new(
                endpoint,
                &cfg.generation.model,
                &cfg.generation.api_key_env,
                cfg.generation.timeout_secs,
                cfg.generation.native_multi_sample,
            )))
        }
    }
}

/// Runs the full pipeline against the configured backend.
///
/// The completion backend is built from the *invocation* config, while
/// every pipeline parameter is pinned by the run directory's snapshot.
/// Resuming an interrupted run against a replacement endpoint (or a
/// repaired mock script) therefore works without editing the run.
pub fn synthesize(cfg: &PipelineConfig) -> Result<StatsReport> {
    let backend = build_backend(cfg)?;
    synthesize_with_backend(cfg, backend)
}

/// Runs the full pipeline against a caller-supplied backend (tests inject
/// failing or counting wrappers here).
pub fn synthesize_with_backend(
    cfg: &PipelineConfig,
    backend: Box<dyn CompletionBackend>,
) -> Result<StatsReport> {
    cfg.validate()?;
    let started = Instant::now();
    let run = RunDir::new(&cfg.run.output_dir);
    let cfg = run.prepare(cfg)?;

    let gateway = Gateway::new(backend, cfg.run.max_in_flight, cfg.generation.retry_base_ms);
    let embedder = build_embedder(&cfg.embedding, cfg.generation.retry_base_ms)?;

    let questions = generate_questions(&gateway, &cfg, &run)?;
    log::info!("stage 1 complete: {} raw questions", questions.len());

    let accepted = if cfg.run.diversify {
        let accepted = run_diversify(&gateway, embedder.as_ref(), &cfg, &run, &questions)?;
        log::info!("stage 2 complete: {} of {} questions accepted", accepted.len(), questions.len());
        accepted
    } else {
        questions
    };

    let records = run_consensus(&gateway, &cfg, &run, &accepted)?;
    log::info!(
        "stage 3 complete: {} of {} questions kept",
        records.iter().filter(|r| r.kept).count(),
        records.len()
    );

    let rows = crate::dataset::sft_rows(&records);
    crate::dataset::write_sft(&run.path(DATASET_SFT), &rows)?;

    let entries = embedding_entries(embedder.as_ref(), &accepted)?;
    crate::dataset::write_embeddings_csv(
        &run.path(EMBEDDINGS_CSV),
        &entries,
        embedder.dimension(),
    )?;

    let report = StatsReport {
        counts: recompute_counts(&run)?,
        runtime: StatsRuntime {
            wall_clock_ms: started.elapsed().as_millis() as u64,
            gateway_retries: gateway.retries_total(),
            embedding_retries: embedder.retries_total(),
        },
    };
    write_stats(&run.path(STATS_JSON), &report)?;
    Ok(report)
}

static LIST_ITEM: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\d+\s*[.)]\s*").unwrap());

/// Splits a bait completion into question texts. A single-question call
/// takes the whole completion; multi-question calls expect a numbered list
/// and fall back to the whole completion when no numbering is present.
fn split_questions(text: &str, questions_per_call: usize) -> Vec<String> {
    let whole = || {
        let t = text.trim();
        if t.is_empty() {
            Vec::new()
        } else {
            vec![t.to_string()]
        }
    };
    if questions_per_call <= 1 {
        return whole();
    }
    let mut items: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for line in text.lines() {
        if let Some(m) = LIST_ITEM.find(line) {
            if let Some(done) = current.take() {
                items.push(done);
            }
            current = Some(line[m.end()..].to_string());
        } else if let Some(cur) = &mut current {
            cur.push('\n');
            cur.push_str(line);
        }
        // Preamble lines before the first numbered item are dropped.
    }
    if let Some(done) = current.take() {
        items.push(done);
    }
    let items: Vec<String> =
        items.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        whole()
    } else {
        items
    }
}

/// Stage 1: repeat the bait prompt until the target question count exists
/// on disk. Questions get ids 1..=n in generation order.
fn generate_questions(gateway: &Gateway, cfg: &PipelineConfig, run: &RunDir) -> Result<Vec<Question>> {
    let path = run.path(STAGE_RAW);
    let mut questions: Vec<Question> = crate::jsonl::read_all(&path)?;
    for (i, q) in questions.iter().enumerate() {
        if q.id != (i + 1) as u64 {
            return Err(Error::InconsistentRecord(format!(
                "{} line {}: id {} out of sequence",
                path.display(),
                i + 1,
                q.id
            )));
        }
    }
    let target = cfg.run.target_question_count as usize;
    if questions.len() >= target {
        questions.truncate(target);
        return Ok(questions);
    }
    let mut writer = JsonlWriter::append(&path)?;
    let request = CompletionRequest::single_user(
        cfg.prompts.bait.clone(),
        cfg.run.gen_temperature,
        cfg.generation.question_max_tokens,
    );
    while questions.len() < target {
        let texts = gateway.complete(&request)?;
        let parts = split_questions(&texts[0], cfg.run.questions_per_call);
        if parts.is_empty() {
            return Err(Error::MalformedResponse(
                "bait call returned no usable question text".into(),
            ));
        }
        for text in parts {
            if questions.len() >= target {
                break;
            }
            let q = Question::raw((questions.len() + 1) as u64, text);
            writer.write(&q)?;
            questions.push(q);
        }
    }
    Ok(questions)
}

/// Stage 2: rejection-sampling deduplication in question-id order.
fn run_diversify(
    gateway: &Gateway,
    embedder: &dyn Embedder,
    cfg: &PipelineConfig,
    run: &RunDir,
    questions: &[Question],
) -> Result<Vec<Question>> {
    let path = run.path(STAGE_DEDUP);
    let existing: Vec<DedupRecord> = crate::jsonl::read_all(&path)?;
    if existing.len() > questions.len() {
        return Err(Error::InconsistentRecord(format!(
            "{} holds {} records for {} questions",
            path.display(),
            existing.len(),
            questions.len()
        )));
    }
    for (rec, q) in existing.iter().zip(questions) {
        if rec.question.id != q.id {
            return Err(Error::InconsistentRecord(format!(
                "{}: record for question {} where {} was expected",
                path.display(),
                rec.question.id,
                q.id
            )));
        }
    }

    let mut div = Diversifier::new(embedder, gateway, cfg);
    let mut accepted: Vec<Question> = Vec::new();
    for rec in &existing {
        if rec.accepted {
            div.seed_accepted(&rec.question)?;
            accepted.push(rec.question.clone());
        }
    }
    let mut writer = JsonlWriter::append(&path)?;
    for q in &questions[existing.len()..] {
        let rec = div.process(q.clone())?;
        writer.write(&rec)?;
        if rec.accepted {
            accepted.push(rec.question.clone());
        }
    }
    Ok(accepted)
}

/// Stages 3 and 4: answer sampling and majority voting, parallel across
/// questions, checkpointed in accepted-question order. Stored candidate
/// sets are reused so a resumed run never re-buys model samples it already
/// paid for.
fn run_consensus(
    gateway: &Gateway,
    cfg: &PipelineConfig,
    run: &RunDir,
    accepted: &[Question],
) -> Result<Vec<ConsensusRecord>> {
    let mut eff = cfg.clone();
    if !eff.run.consensus {
        eff.run.samples_per_question = 1;
    }
    let cand_path = run.path(STAGE_CANDIDATES);
    let votes_path = run.path(STAGE_VOTES);

    let existing_sets: Vec<CandidateSet> = crate::jsonl::read_all(&cand_path)?;
    let existing_votes: Vec<ConsensusRecord> = crate::jsonl::read_all(&votes_path)?;
    if existing_votes.len() > existing_sets.len() || existing_sets.len() > accepted.len() {
        return Err(Error::InconsistentRecord(format!(
            "stage files out of step: {} candidate sets, {} votes, {} accepted questions",
            existing_sets.len(),
            existing_votes.len(),
            accepted.len()
        )));
    }
    for (set, q) in existing_sets.iter().zip(accepted) {
        if set.question_id != q.id {
            return Err(Error::InconsistentRecord(format!(
                "{}: candidates for question {} where {} was expected",
                cand_path.display(),
                set.question_id,
                q.id
            )));
        }
    }
    for (rec, q) in existing_votes.iter().zip(accepted) {
        if rec.question.id != q.id {
            return Err(Error::InconsistentRecord(format!(
                "{}: vote for question {} where {} was expected",
                votes_path.display(),
                rec.question.id,
                q.id
            )));
        }
    }

    let done = existing_votes.len();
    let total = accepted.len();
    if done < total {
        let cand_sink = std::sync::Mutex::new(OrderedSink::<CandidateSet>::open(
            &cand_path,
            existing_sets.len(),
        )?);
        let vote_sink =
            std::sync::Mutex::new(OrderedSink::<ConsensusRecord>::open(&votes_path, done)?);

        let next = AtomicUsize::new(done);
        let abort = AtomicBool::new(false);
        let workers = eff.run.max_in_flight.min(total - done).max(1);
        type WorkResult = (usize, Result<(Option<CandidateSet>, ConsensusRecord)>);
        let (tx, rx) = mpsc::channel::<WorkResult>();

        let mut first_err: Option<Error> = None;
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let eff = &eff;
                let next = &next;
                let abort = &abort;
                let existing_sets = &existing_sets;
                scope.spawn(move || loop {
                    if abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let pos = next.fetch_add(1, Ordering::SeqCst);
                    if pos >= total {
                        break;
                    }
                    let q = &accepted[pos];
                    let outcome: Result<(Option<CandidateSet>, ConsensusRecord)> = (|| {
                        let (set, cached) = match existing_sets.get(pos) {
                            Some(s) => (s.clone(), true),
                            None => (sample_answers(gateway, eff, q)?, false),
                        };
                        let mut rng = question_rng(eff.run.rng_seed, q.id, DOMAIN_VOTE);
                        let outcome = vote(q.id, &set.candidates, &mut rng);
                        let record = conclude(q.clone(), &set, outcome);
                        Ok((if cached { None } else { Some(set) }, record))
                    })();
                    if outcome.is_err() {
                        abort.store(true, Ordering::SeqCst);
                    }
                    if tx.send((pos, outcome)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);

            for (pos, outcome) in rx {
                match outcome {
                    Ok((new_set, record)) => {
                        let write_result = (|| {
                            if let Some(set) = new_set {
                                cand_sink.lock().unwrap().push(pos, set)?;
                            }
                            vote_sink.lock().unwrap().push(pos, record)
                        })();
                        if let Err(e) = write_result {
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

    // The votes file is the authority on what this stage produced.
    crate::jsonl::read_all(&votes_path)
}

/// Re-exports embeddings.csv for an existing run directory: accepted
/// questions when the run deduplicated, all raw questions otherwise.
pub fn export_run_embeddings(run: &RunDir) -> Result<usize> {
    let cfg = run.load_snapshot()?;
    let embedder = build_embedder(&cfg.embedding, cfg.generation.retry_base_ms)?;
    let accepted: Vec<Question> = if cfg.run.diversify {
        crate::jsonl::read_all::<DedupRecord>(&run.path(STAGE_DEDUP))?
            .into_iter()
            .filter(|r| r.accepted)
            .map(|r| r.question)
            .collect()
    } else {
        crate::jsonl::read_all(&run.path(STAGE_RAW))?
    };
    let entries = embedding_entries(embedder.as_ref(), &accepted)?;
    crate::dataset::write_embeddings_csv(
        &run.path(EMBEDDINGS_CSV),
        &entries,
        embedder.dimension(),
    )?;
    Ok(entries.len())
}

/// Embeddings for export, reusing vectors stored during deduplication and
/// embedding the rest (a run without the dedup stage stores none).
fn embedding_entries(
    embedder: &dyn Embedder,
    accepted: &[Question],
) -> Result<Vec<(u64, Vec<f32>)>> {
    let mut entries: Vec<Option<(u64, Vec<f32>)>> = accepted
        .iter()
        .map(|q| q.embedding.clone().map(|e| (q.id, e)))
        .collect();
    let missing: Vec<usize> =
        (0..accepted.len()).filter(|&i| entries[i].is_none()).collect();
    if !missing.is_empty() {
        let texts: Vec<String> = missing.iter().map(|&i| accepted[i].text.clone()).collect();
        let vectors = embedder.embed(&texts)?;
        for (&i, v) in missing.iter().zip(vectors) {
            entries[i] = Some((accepted[i].id, v));
        }
    }
    Ok(entries.into_iter().map(|e| e.expect("filled")).collect())
}
