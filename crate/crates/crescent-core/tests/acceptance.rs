//! Acceptance suite: each test exercises one release criterion end to end
//! and prints `ACCEPTANCE <name>: PASS` when it holds. Run with
//! `cargo test --test acceptance -- --nocapture` to see the checklist.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crescent_core::config::{BackendKind, PipelineConfig};
use crescent_core::consensus::{vote, ConsensusRecord, VoteOutcome};
use crescent_core::decimal::DecimalValue;
use crescent_core::diversify::{DedupRecord, Diversifier};
use crescent_core::domain::{AnswerCandidate, Origin, Question};
use crescent_core::embed::{l2_distance, HashedBagEmbedder};
use crescent_core::eval::{run_eval, score_completion, select_exemplars, BenchmarkItem, EvalOptions};
use crescent_core::extract::{extract_last_number, extract_marker};
use crescent_core::gateway::mock::{FailAfter, MockBackend, ScriptEntry};
use crescent_core::gateway::Gateway;
use crescent_core::index::VectorIndex;
use crescent_core::jsonl;
use crescent_core::runstate::{STAGE_DEDUP, STAGE_VOTES};
use crescent_core::seeding::{question_rng, DOMAIN_EVAL, DOMAIN_VOTE};
use crescent_core::{canonical_equal, synthesize, synthesize_with_backend, CanonicalAnswer};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

/// The configuration under which the golden fixtures were generated.
/// max_in_flight is 1 because the script assigns answer entries to
/// equal-text questions in request order.
fn golden_cfg(out_dir: &Path, diversify: bool, consensus: bool) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.run.target_question_count = 10;
    cfg.run.samples_per_question = 5;
    cfg.run.theta = 0.25;
    cfg.run.rng_seed = 7;
    cfg.run.max_in_flight = 1;
    cfg.run.diversify = diversify;
    cfg.run.consensus = consensus;
    cfg.run.output_dir = out_dir.to_path_buf();
    cfg.generation.backend = BackendKind::ScriptedMock;
    cfg.generation.mock_script = Some(fixture("golden_script.jsonl"));
    cfg.generation.retry_base_ms = 1;
    cfg.embedding.dimension = 384;
    cfg
}

// ---------------------------------------------------------------------
// Criterion: with the deterministic fallback embedder, 1,000 synthetic
// questions (200 forced duplicates) at theta = 0.25 leave no accepted pair
// closer than theta, and every question lands in exactly one disposition.
// ---------------------------------------------------------------------
#[test]
fn acceptance_diversification_invariant() {
    let started = Instant::now();
    let theta = 0.25;

    // Every fifth question repeats the one four places earlier: 200 forced
    // duplicates among 1,000.
    let mut texts: Vec<String> = Vec::with_capacity(1_000);
    for i in 0..1_000usize {
        if i % 5 == 4 {
            texts.push(texts[i - 4].clone());
        } else {
            texts.push(format!(
                "Sample problem {i} has {} cats and {} dogs in yard {}.",
                3 * i + 1,
                7 * i + 2,
                (i * i) % 997
            ));
        }
    }

    // Rewrites: 180 distinct replacements, then the well runs dry (the
    // sticky tail repeats the first question's text, which always
    // collides), so late duplicates exhaust their retries and drop.
    let mut entries: Vec<ScriptEntry> = (0..180)
        .map(|j| {
            ScriptEntry::by_contains(
                "please modify the latter",
                vec![format!(
                    "Rewritten question {j} speaks of {} turtles and {} frogs.",
                    17 * j + 1,
                    29 * j + 3
                )],
            )
        })
        .collect();
    entries.push(ScriptEntry::by_contains(
        "please modify the latter",
        vec![texts[0].clone()],
    ));

    let embedder = HashedBagEmbedder::new(384);
    let backend = MockBackend::from_entries(entries).unwrap();
    let gateway = Gateway::new(Box::new(backend), 1, 1).without_sleep();
    let mut cfg = PipelineConfig::default();
    cfg.run.theta = theta;

    let mut div = Diversifier::new(&embedder, &gateway, &cfg);
    let mut records: Vec<DedupRecord> = Vec::with_capacity(1_000);
    for (i, text) in texts.iter().enumerate() {
        records.push(div.process(Question::raw(i as u64 + 1, text.clone())).unwrap());
    }

    assert_eq!(records.len(), 1_000);
    let accepted: Vec<&DedupRecord> = records.iter().filter(|r| r.accepted).collect();
    let dropped = records.len() - accepted.len();
    assert_eq!(accepted.len() + dropped, 1_000, "conservation across dispositions");
    assert!(dropped > 0, "the starved rewrite tail must drop some duplicates");
    assert!(
        records.iter().any(|r| r.question.origin == Origin::Modified),
        "some duplicates must be rewritten"
    );

    // Exhaustive O(n^2) check over the accepted set.
    let vectors: Vec<&Vec<f32>> = accepted
        .iter()
        .map(|r| r.question.embedding.as_ref().expect("accepted questions are embedded"))
        .collect();
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let d = l2_distance(vectors[i], vectors[j]);
            assert!(
                d >= theta,
                "accepted questions {} and {} are {d} apart (< {theta})",
                accepted[i].question.id,
                accepted[j].question.id
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10s");
    println!(
        "ACCEPTANCE diversification_invariant: PASS ({} accepted, {} dropped, {:?})",
        accepted.len(),
        dropped,
        elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion: the flat index answers 100 random queries over 1,000 random
// 384-d vectors exactly like an independent exhaustive-scan oracle.
// ---------------------------------------------------------------------
#[test]
fn acceptance_nearest_neighbor_oracle() {
    let dimension = 384;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut make = |n: usize| -> Vec<Vec<f32>> {
        (0..n)
            .map(|_| (0..dimension).map(|_| rng.gen_range(-1.0f32..1.0)).collect())
            .collect()
    };
    let corpus = make(1_000);
    let queries = make(100);

    let mut index = VectorIndex::new(dimension);
    for (i, v) in corpus.iter().enumerate() {
        index.insert(i as u64 + 1, v.clone()).unwrap();
    }

    for (qi, q) in queries.iter().enumerate() {
        // Independent oracle: plain loop, f64 accumulation, lowest id wins ties.
        let mut best_id = 0u64;
        let mut best_d = f64::INFINITY;
        for (i, v) in corpus.iter().enumerate() {
            let mut acc = 0f64;
            for (a, b) in q.iter().zip(v) {
                let diff = *a as f64 - *b as f64;
                acc += diff * diff;
            }
            let d = acc.sqrt();
            if d < best_d {
                best_d = d;
                best_id = i as u64 + 1;
            }
        }
        let got = index.nearest(q).expect("non-empty index");
        assert_eq!(got.id, best_id, "query {qi}: wrong neighbor id");
        let rel = (got.distance - best_d).abs() / best_d.max(1e-12);
        assert!(rel <= 1e-6, "query {qi}: distance off by {rel} relative");
    }
    println!("ACCEPTANCE nearest_neighbor_oracle: PASS (100 queries over 1,000 vectors)");
}

// ---------------------------------------------------------------------
// Criterion: vote() matches a brute-force mode-finding oracle on every
// multiset of size <= 5 over {1, 2, 3, unextractable} — all 4^5 = 1,024
// five-sample cases plus every shorter prefix alphabet combination.
// ---------------------------------------------------------------------
#[test]
fn acceptance_voting_oracle() {
    let started = Instant::now();
    // Symbol 0..=2 are the numeric classes 1..=3; symbol 3 is unextractable.
    let sample_text = |symbol: usize| -> String {
        match symbol {
            0 => "#### 1".to_string(),
            1 => "#### 2".to_string(),
            2 => "#### 3".to_string(),
            _ => "no answer".to_string(),
        }
    };

    let mut cases = 0usize;
    for m in 1..=5usize {
        for code in 0..4usize.pow(m as u32) {
            let symbols: Vec<usize> =
                (0..m).map(|pos| (code / 4usize.pow(pos as u32)) % 4).collect();
            let candidates: Vec<AnswerCandidate> = symbols
                .iter()
                .enumerate()
                .map(|(i, &s)| AnswerCandidate::from_text(900, i, sample_text(s)))
                .collect();

            // Brute-force oracle over the symbol list.
            let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
            let mut excluded = 0u32;
            for &s in &symbols {
                if s == 3 {
                    excluded += 1;
                } else {
                    *counts.entry(s).or_insert(0) += 1;
                }
            }
            let mut rng = question_rng(code as u64, 900, DOMAIN_VOTE);
            let outcome = vote(900, &candidates, &mut rng);
            if counts.is_empty() {
                assert!(
                    matches!(outcome, VoteOutcome::AllUnextractable { .. }),
                    "case {symbols:?}: expected all-unextractable"
                );
            } else {
                let max = *counts.values().max().unwrap();
                let modes: Vec<usize> =
                    counts.iter().filter(|(_, &c)| c == max).map(|(&s, _)| s).collect();
                match outcome {
                    VoteOutcome::Winner(record) => {
                        assert_eq!(record.winner_count, max, "case {symbols:?}");
                        assert_eq!(record.tie_size, modes.len() as u32, "case {symbols:?}");
                        assert_eq!(
                            record.excluded_unextractable, excluded,
                            "case {symbols:?}"
                        );
                        let winner_symbol = modes
                            .iter()
                            .copied()
                            .find(|&s| {
                                record.winner
                                    == CanonicalAnswer::numeric(
                                        DecimalValue::parse(&(s + 1).to_string()).unwrap(),
                                    )
                            })
                            .unwrap_or_else(|| panic!("case {symbols:?}: winner not a mode"));
                        // The kept sample must carry the winning value.
                        assert_eq!(
                            symbols[record.selected_sample_index],
                            winner_symbol,
                            "case {symbols:?}: representative sample mismatch"
                        );
                    }
                    VoteOutcome::AllUnextractable { .. } => {
                        panic!("case {symbols:?}: lost a numeric class")
                    }
                }
            }
            cases += 1;
        }
    }
    assert_eq!(cases, 4 + 16 + 64 + 256 + 1024);
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1s");
    println!("ACCEPTANCE voting_oracle: PASS ({cases} cases in {elapsed:?})");
}

// ---------------------------------------------------------------------
// Criterion: a two-way tie voted 10,000 times under distinct seeds gives
// each class 5,000 +/- 200 wins (about four binomial standard deviations).
// ---------------------------------------------------------------------
#[test]
fn acceptance_tie_break_uniformity() {
    let candidates = vec![
        AnswerCandidate::from_text(42, 0, "#### 1"),
        AnswerCandidate::from_text(42, 1, "#### 2"),
    ];
    let one = CanonicalAnswer::numeric(DecimalValue::parse("1").unwrap());
    let mut wins_for_one = 0u32;
    for seed in 0..10_000u64 {
        let mut rng = question_rng(seed, 42, DOMAIN_VOTE);
        match vote(42, &candidates, &mut rng) {
            VoteOutcome::Winner(record) => {
                assert_eq!(record.tie_size, 2);
                assert_eq!(record.winner_count, 1);
                if record.winner == one {
                    wins_for_one += 1;
                }
            }
            VoteOutcome::AllUnextractable { .. } => panic!("numeric tie cannot be unextractable"),
        }
    }
    assert!(
        (4_800..=5_200).contains(&wins_for_one),
        "class 1 won {wins_for_one} of 10,000 — outside 5,000 +/- 200"
    );
    println!("ACCEPTANCE tie_break_uniformity: PASS (class 1 won {wins_for_one}/10,000)");
}

// ---------------------------------------------------------------------
// Criterion: a curated corpus of >= 25 strings agrees exactly with
// hand-specified expectations for both extractors, including the marker
// rule, the last-number rule, and either-extractor scoring.
// ---------------------------------------------------------------------
#[test]
fn acceptance_extractor_fixture_corpus() {
    fn num(s: &str) -> CanonicalAnswer {
        CanonicalAnswer::numeric(DecimalValue::parse(s).unwrap())
    }
    fn expect(s: Option<&str>) -> CanonicalAnswer {
        s.map(num).unwrap_or(CanonicalAnswer::Unextractable)
    }

    // (input, number after last marker, last number anywhere)
    let corpus: Vec<(&str, Option<&str>, Option<&str>)> = vec![
        ("#### 42", Some("42"), Some("42")),
        ("steps first... #### 1,234", Some("1234"), Some("1234")),
        ("#### $7.50", Some("7.5"), Some("7.5")),
        ("#### -3", Some("-3"), Some("-3")),
        ("#### 12 then more #### 15", Some("15"), Some("15")),
        ("no numbers at all", None, None),
        ("#### ", None, None),
        ("#### n/a", None, None),
        ("3 cats and 4 dogs", None, Some("4")),
        ("total: 1,234.50 dollars", None, Some("1234.5")),
        ("#### 100%", Some("100"), Some("100")),
        ("100% sure it is #### 88", Some("88"), Some("88")),
        ("prices $80,000 and $90,000", None, Some("90000")),
        ("-5 then -7", None, Some("-7")),
        ("#### 0.25", Some("0.25"), Some("0.25")),
        ("answer: 42.0", None, Some("42")),
        ("#### +17", Some("17"), Some("17")),
        ("7 things #### n/a", None, Some("7")),
        ("#### 42 dollars", Some("42"), Some("42")),
        ("grew by 20% then #### 19", Some("19"), Some("19")),
        ("", None, None),
        ("####42 glued to the marker", Some("42"), Some("42")),
        ("echoed template #### 99\nreal answer #### 10", Some("10"), Some("10")),
        ("so each piece is 12.", None, Some("12")),
        ("value 12,345.67 end", None, Some("12345.67")),
        ("#### 1 ... #### 2", Some("2"), Some("2")),
        ("$-5 net result", None, Some("-5")),
        ("008 leading zeros #### 008", Some("8"), Some("8")),
    ];
    assert!(corpus.len() >= 25, "corpus must stay at 25+ fixtures");
    for (input, marker, last) in &corpus {
        assert_eq!(extract_marker(input), expect(*marker), "marker extractor on {input:?}");
        assert_eq!(
            extract_last_number(input),
            expect(*last),
            "last-number extractor on {input:?}"
        );
    }

    // Either-extractor scoring: correct when one of the two recovers gold.
    let gold = DecimalValue::parse("42").unwrap();
    let marker_wrong_last_right = score_completion(0, "#### 41 but wait, 42 extra".into(), &gold);
    assert!(!marker_wrong_last_right.marker_correct);
    assert!(marker_wrong_last_right.last_number_correct);
    assert!(marker_wrong_last_right.correct);

    let marker_right_last_wrong = score_completion(1, "#### 42 and later 43".into(), &gold);
    assert!(marker_right_last_wrong.marker_correct);
    assert!(!marker_right_last_wrong.last_number_correct);
    assert!(marker_right_last_wrong.correct);

    let no_marker = score_completion(2, "so the total is 42.".into(), &gold);
    assert!(no_marker.correct, "last-number path alone must score");
    let neither = score_completion(3, "#### 41 and nothing else 41".into(), &gold);
    assert!(!neither.correct);

    // Canonical equality backs the whole protocol: 1234 == 1234.0.
    assert!(canonical_equal(
        &CanonicalAnswer::numeric(DecimalValue::parse("1234").unwrap()),
        &CanonicalAnswer::numeric(DecimalValue::parse("1234.0").unwrap()),
    ));
    println!(
        "ACCEPTANCE extractor_fixture_corpus: PASS ({} fixtures, dual-extractor scoring)",
        corpus.len()
    );
}

// ---------------------------------------------------------------------
// Criterion: the hermetic mock run (n=10, m=5, fixed seed) is byte-identical
// to the checked-in golden dataset, and a mid-run kill followed by a resume
// converges to the same bytes.
// ---------------------------------------------------------------------
#[test]
fn acceptance_hermetic_golden_run() {
    let started = Instant::now();
    let golden = std::fs::read(fixture("golden/dataset_full.sft.jsonl")).unwrap();

    // Leg 1: uninterrupted run.
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden_cfg(&dir.path().join("run"), true, true);
    synthesize(&cfg).unwrap();
    let direct = std::fs::read(cfg.run.output_dir.join("dataset.sft.jsonl")).unwrap();
    assert_eq!(direct, golden, "uninterrupted dataset differs from the golden file");

    // Leg 2: kill after 13 successful calls (10 bait + 1 rewrite + 2 answer
    // sets), then resume with a healthy backend.
    let cfg2 = golden_cfg(&dir.path().join("run-resume"), true, true);
    let script = MockBackend::load(&fixture("golden_script.jsonl")).unwrap();
    let failing = FailAfter::new(Box::new(script), 13);
    synthesize_with_backend(&cfg2, Box::new(failing))
        .expect_err("the starved backend must abort the run");
    let votes_so_far: Vec<ConsensusRecord> =
        jsonl::read_all(&cfg2.run.output_dir.join(STAGE_VOTES)).unwrap();
    assert_eq!(votes_so_far.len(), 2, "exactly two questions voted before the kill");

    synthesize(&cfg2).unwrap();
    let resumed = std::fs::read(cfg2.run.output_dir.join("dataset.sft.jsonl")).unwrap();
    assert_eq!(resumed, golden, "resumed dataset differs from the golden file");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5s");
    println!("ACCEPTANCE hermetic_golden_run: PASS (direct and kill+resume both match, {elapsed:?})");
}

// ---------------------------------------------------------------------
// Criterion: the four stage-toggle variants (full / w-o CE / w-o DV /
// BP-only) from one seed produce structurally distinct outputs, each
// matching its own golden file.
// ---------------------------------------------------------------------
#[test]
fn acceptance_ablation_matrix() {
    #[derive(serde::Deserialize)]
    struct Row {
        origin: Origin,
        winner_count: u32,
        tie_size: u32,
        question: String,
    }

    let dir = tempfile::tempdir().unwrap();
    let variants = [
        ("full", true, true),
        ("no_ce", true, false),
        ("no_dv", false, true),
        ("bp_only", false, false),
    ];
    let mut datasets: Vec<(&str, Vec<u8>)> = Vec::new();
    for (name, diversify, consensus) in variants {
        let cfg = golden_cfg(&dir.path().join(name), diversify, consensus);
        synthesize(&cfg).unwrap();
        let bytes = std::fs::read(cfg.run.output_dir.join("dataset.sft.jsonl")).unwrap();
        let golden =
            std::fs::read(fixture(&format!("golden/dataset_{name}.sft.jsonl"))).unwrap();
        assert_eq!(bytes, golden, "variant {name} differs from its golden file");

        let dedup_present = cfg.run.output_dir.join(STAGE_DEDUP).exists();
        assert_eq!(dedup_present, diversify, "variant {name}: dedup stage file presence");

        let rows: Vec<Row> = bytes
            .split(|&b| b == b'\n')
            .filter(|l| !l.is_empty())
            .map(|l| serde_json::from_slice(l).unwrap())
            .collect();
        if consensus {
            assert!(
                rows.iter().any(|r| r.winner_count > 1),
                "variant {name}: consensus must produce multi-vote winners"
            );
        } else {
            assert!(
                rows.iter().all(|r| r.winner_count == 1 && r.tie_size == 1),
                "variant {name}: single-sample mode must record m=1 votes"
            );
        }
        if diversify {
            assert!(
                rows.iter().any(|r| r.origin == Origin::Modified),
                "variant {name}: the forced duplicate must be rewritten"
            );
            let mut texts: Vec<&str> = rows.iter().map(|r| r.question.as_str()).collect();
            texts.sort_unstable();
            texts.dedup();
            assert_eq!(texts.len(), rows.len(), "variant {name}: questions must be unique");
        } else {
            assert!(
                rows.iter().all(|r| r.origin == Origin::Raw),
                "variant {name}: no rewrites without the dedup stage"
            );
            let mut texts: Vec<&str> = rows.iter().map(|r| r.question.as_str()).collect();
            texts.sort_unstable();
            let before = texts.len();
            texts.dedup();
            assert!(texts.len() < before, "variant {name}: the duplicate must survive");
        }
        datasets.push((name, bytes));
    }

    for i in 0..datasets.len() {
        for j in (i + 1)..datasets.len() {
            assert_ne!(
                datasets[i].1, datasets[j].1,
                "variants {} and {} must differ",
                datasets[i].0, datasets[j].0
            );
        }
    }
    println!("ACCEPTANCE ablation_matrix: PASS (4 variants, all golden-checked and distinct)");
}

// ---------------------------------------------------------------------
// Criterion: a scripted mock answering gold on a known 7-of-10 subset
// reports accuracy exactly 0.700 at 0 shots and at 5 shots, and 5-shot
// exemplar selection never includes the item under test.
// ---------------------------------------------------------------------
#[test]
fn acceptance_evaluator_exactness() {
    let items: Vec<BenchmarkItem> = (0..10)
        .map(|i| BenchmarkItem {
            question: format!("Benchmark item {i} asks how many owls roost in barn {i}?"),
            answer: format!("Count the owls. #### {}", 3 * i + 1),
            gold: DecimalValue::parse(&(3 * i + 1).to_string()).unwrap(),
        })
        .collect();
    let train: Vec<BenchmarkItem> = (0..8)
        .map(|j| BenchmarkItem {
            question: format!("Training drill {j} mentions {j} cups on a tray?"),
            answer: format!("Just count. #### {j}"),
            gold: DecimalValue::parse(&j.to_string()).unwrap(),
        })
        .collect();

    // Items 0..7 answered with gold, 7..10 answered wrongly.
    let entries: Vec<ScriptEntry> = (0..10)
        .map(|i| {
            let completion = if i < 7 {
                format!("The count is #### {}", 3 * i + 1)
            } else {
                "I will guess #### 99999".to_string()
            };
            ScriptEntry::by_contains(format!("item {i} asks"), vec![completion])
        })
        .collect();

    let dir = tempfile::tempdir().unwrap();
    for shots in [0u32, 5] {
        let backend = MockBackend::from_entries(entries.clone()).unwrap();
        let gateway = Gateway::new(Box::new(backend), 4, 1).without_sleep();
        let opts = EvalOptions { shots, rng_seed: 7, ..EvalOptions::default() };
        let train_pool = if shots > 0 { Some(train.as_slice()) } else { None };
        let summary = run_eval(
            &gateway,
            &items,
            train_pool,
            &opts,
            &dir.path().join(format!("records-{shots}.jsonl")),
        )
        .unwrap();
        assert_eq!(summary.total, 10);
        assert_eq!(summary.correct, 7);
        assert_eq!(summary.accuracy, 0.7, "{shots}-shot accuracy must be exactly 0.700");
    }

    // Leave-one-out exemplar selection excludes the item under test,
    // asserted per item on the same RNG streams the evaluator uses.
    for (i, item) in items.iter().enumerate() {
        let mut rng = question_rng(7, i as u64, DOMAIN_EVAL);
        let exemplars = select_exemplars(&items, Some(i), 5, &mut rng).unwrap();
        assert_eq!(exemplars.len(), 5);
        assert!(
            exemplars.iter().all(|e| e.question != item.question),
            "item {i} appeared among its own exemplars"
        );
    }
    println!("ACCEPTANCE evaluator_exactness: PASS (0.700 at 0 and 5 shots, exclusion per item)");
}

// ---------------------------------------------------------------------
// Criterion (optional, network-gated): against a live OpenAI-compatible
// endpoint, synthesize 20 pairs end to end with >= 80% extractable winners.
// Run with: CRESCENT_LIVE_ENDPOINT=... CRESCENT_API_KEY=... \
//   cargo test --test acceptance -- --ignored acceptance_live_smoke
// ---------------------------------------------------------------------
#[test]
#[ignore = "requires a live endpoint; set CRESCENT_LIVE_ENDPOINT and CRESCENT_API_KEY"]
fn acceptance_live_smoke() {
    let endpoint = std::env::var("CRESCENT_LIVE_ENDPOINT")
        .expect("set CRESCENT_LIVE_ENDPOINT to an OpenAI-compatible base URL");
    let model = std::env::var("CRESCENT_LIVE_MODEL").unwrap_or_else(|_| "default".to_string());

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.run.target_question_count = 20;
    cfg.run.output_dir = dir.path().join("live-run");
    cfg.generation.backend = BackendKind::HttpOpenaiCompatible;
    cfg.generation.endpoint = Some(endpoint);
    cfg.generation.model = model;

    let report = synthesize(&cfg).expect("live synthesis must complete");
    let processed = report.counts.consensus_processed;
    let kept = report.counts.consensus_kept;
    assert!(processed > 0, "no questions reached consensus");
    assert!(
        kept * 10 >= processed * 8,
        "only {kept} of {processed} questions had extractable winners (< 80%)"
    );
    println!("ACCEPTANCE live_smoke: PASS ({kept}/{processed} extractable winners)");
}
