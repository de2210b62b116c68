//! Command-line entry point: synthesize datasets, evaluate models, and
//! inspect run directories. Exit codes: 0 success, 1 configuration error,
//! 2 stage failure (resumable), 3 checkpoint corruption.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use crescent_core::config::BackendKind;
use crescent_core::error::{Error, Result};
use crescent_core::eval::{load_benchmark, run_eval, EvalOptions};
use crescent_core::gateway::Gateway;
use crescent_core::runstate::{RunDir, EVAL_RECORDS, EVAL_SUMMARY, STATS_JSON};
use crescent_core::stats::{load_stats, recompute_counts, write_stats, StatsReport};
use crescent_core::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "crescent",
    version,
    about = "Synthetic QA dataset generation and math-benchmark evaluation"
)]
struct Cli {
    /// Increase log verbosity (repeat for more detail).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic QA dataset: bait prompting, deduplication,
    /// consensus voting, and artifact emission into the run directory.
    Synthesize {
        /// TOML config file; omitted fields take built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run directory for checkpoints and artifacts.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Number of raw questions to generate.
        #[arg(long)]
        target_count: Option<u64>,
        /// Answer samples per question (consensus vote width).
        #[arg(long)]
        samples: Option<usize>,
        /// Run seed for all tie-break and exemplar RNG streams.
        #[arg(long)]
        seed: Option<u64>,
        /// Duplicate threshold: questions closer than this are rewritten.
        #[arg(long)]
        theta: Option<f64>,
        /// Use the scripted mock backend with this script file.
        #[arg(long)]
        mock_script: Option<PathBuf>,
        /// Skip the deduplication stage.
        #[arg(long)]
        no_diversify: bool,
        /// Skip consensus voting: a single sample answers each question.
        #[arg(long)]
        no_consensus: bool,
    },
    /// Evaluate a model on a benchmark file under the dual-extractor rule.
    Evaluate {
        /// TOML config file; omitted fields take built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Benchmark JSONL: {"question", "answer"} with "#### gold" answers.
        #[arg(long)]
        data: PathBuf,
        /// Exemplar pool for few-shot prompts; defaults to drawing from the
        /// benchmark itself, excluding the item under test.
        #[arg(long)]
        train: Option<PathBuf>,
        /// Number of few-shot exemplars (0 = bare question).
        #[arg(long, default_value_t = 0)]
        shots: u32,
        /// Directory for eval_records.jsonl / eval_summary.json.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Recompute statistics for a run directory and print them.
    Stats {
        /// Run directory of a previous synthesize invocation.
        run_dir: PathBuf,
    },
    /// Export accepted-question embeddings from a run directory to CSV.
    ExportEmbeddings {
        /// Run directory of a previous synthesize invocation.
        run_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed; actual
            // usage mistakes are configuration errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp_millis()
        .init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synthesize {
            config,
            output_dir,
            target_count,
            samples,
            seed,
            theta,
            mock_script,
            no_diversify,
            no_consensus,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = output_dir {
                cfg.run.output_dir = dir;
            }
            if let Some(n) = target_count {
                cfg.run.target_question_count = n;
            }
            if let Some(m) = samples {
                cfg.run.samples_per_question = m;
            }
            if let Some(s) = seed {
                cfg.run.rng_seed = s;
            }
            if let Some(t) = theta {
                cfg.run.theta = t;
            }
            if let Some(script) = mock_script {
                cfg.generation.backend = BackendKind::ScriptedMock;
                cfg.generation.mock_script = Some(script);
            }
            if no_diversify {
                cfg.run.diversify = false;
            }
            if no_consensus {
                cfg.run.consensus = false;
            }
            let report = crescent_core::synthesize(&cfg)?;
            println!(
                "synthesized {} pairs from {} raw questions into {}",
                report.counts.dataset_pairs,
                report.counts.raw_questions,
                cfg.run.output_dir.display()
            );
            Ok(())
        }
        Command::Evaluate {
            config,
            data,
            train,
            shots,
            output_dir,
        } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            let out_dir = output_dir.unwrap_or_else(|| cfg.run.output_dir.clone());
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

            let items = load_benchmark(&data)?;
            let train_pool = train.as_deref().map(load_benchmark).transpose()?;

            let backend = crescent_core::build_backend(&cfg)?;
            let gateway = Gateway::new(
                backend,
                cfg.run.max_in_flight,
                cfg.generation.retry_base_ms,
            );
            let opts = EvalOptions {
                shots,
                max_tokens: cfg.generation.answer_max_tokens,
                rng_seed: cfg.run.rng_seed,
                eval_template: cfg.prompts.eval_template.clone(),
                max_in_flight: cfg.run.max_in_flight,
                ..EvalOptions::default()
            };
            let summary = run_eval(
                &gateway,
                &items,
                train_pool.as_deref(),
                &opts,
                &out_dir.join(EVAL_RECORDS),
            )?;
            let summary_path = out_dir.join(EVAL_SUMMARY);
            let text = serde_json::to_string_pretty(&summary)
                .map_err(|e| Error::InconsistentRecord(e.to_string()))?;
            crescent_core::jsonl::write_atomic(&summary_path, text.as_bytes())?;
            println!(
                "accuracy {:.1}% ({}/{}) at {} shots",
                summary.accuracy * 100.0,
                summary.correct,
                summary.total,
                summary.shots
            );
            Ok(())
        }
        Command::Stats { run_dir } => {
            let run = RunDir::new(run_dir);
            let counts = recompute_counts(&run)?;
            // Wall-clock and retry totals only exist in the live run; keep
            // whatever the run recorded so recomputation stays idempotent.
            let runtime = load_stats(&run.path(STATS_JSON))
                .map(|r| r.runtime)
                .unwrap_or_default();
            let report = StatsReport { counts, runtime };
            write_stats(&run.path(STATS_JSON), &report)?;
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::InconsistentRecord(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
        Command::ExportEmbeddings { run_dir } => {
            let run = RunDir::new(run_dir);
            let count = crescent_core::pipeline::export_run_embeddings(&run)?;
            println!("exported {count} embeddings");
            Ok(())
        }
    }
}
