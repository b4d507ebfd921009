//! seldqa: turn frame-level spatial sound-event annotations into captions,
//! QA datasets, and evaluation reports.
//!
//! Exit codes: 0 success; 1 validation or scoring problems (bad input rows,
//! per-file failures under `--keep-going`, scoring issues, failed checks);
//! 2 fatal I/O or configuration errors.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seldqa_core::ingest::IngestError;
use seldqa_core::loss::{run_loss_checks, LossConfig};
use seldqa_core::pipeline::{
    run_caption, run_qa, run_score, run_synth, PipelineConfig, PipelineError,
};
use seldqa_core::rephrase::{HttpRephraseClient, RemoteRephrase, Rephraser};
use seldqa_core::ClassVocabulary;

use config::{env_map, load_file_config, resolve, FlagOverrides, Resolved};

const API_KEY_VAR: &str = "SELDQA_API_KEY";

#[derive(Parser)]
#[command(
    name = "seldqa",
    version,
    about = "Spatial audio scene captions, QA datasets, and scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render rule-based captions (with paraphrases) per recording
    Caption(CaptionArgs),
    /// Generate the QA dataset for a corpus of recordings
    Qa(QaArgs),
    /// Score a prediction file against a QA dataset
    Score(ScoreArgs),
    /// Emit a seeded synthetic annotation corpus
    Synth(SynthArgs),
    /// Verify loss reference values and gradients
    LossCheck(LossCheckArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct SharedArgs {
    /// Vocabulary file, one class label per line (default: built-in 13)
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Stationarity tolerance for azimuth, degrees
    #[arg(long)]
    tol_az: Option<f64>,
    /// Stationarity tolerance for elevation, degrees
    #[arg(long)]
    tol_el: Option<f64>,
    /// Stationarity tolerance for distance, centimeters
    #[arg(long)]
    tol_dist: Option<f64>,
    /// Force the offline paraphrase/variant banks
    #[arg(long)]
    offline: bool,
    /// Master seed for all randomness
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Azimuth sign convention: left-positive or right-positive
    #[arg(long)]
    convention: Option<String>,
    /// TOML config file (lowest-precedence layer, after flags and SELDQA_* env)
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SharedArgs {
    fn resolve(&self) -> Result<Resolved, Failure> {
        let file = load_file_config(self.config.as_deref()).map_err(Failure::fatal)?;
        let flags = FlagOverrides {
            vocab: self.vocab.clone(),
            tol_az: self.tol_az,
            tol_el: self.tol_el,
            tol_dist: self.tol_dist,
            offline: self.offline,
            seed: self.seed,
            jobs: self.jobs,
            out: self.out.clone(),
            convention: self.convention.clone(),
        };
        resolve(&flags, &env_map(), &file).map_err(Failure::fatal)
    }
}

#[derive(Args)]
struct CaptionArgs {
    /// Directory of annotation CSV files
    input: PathBuf,
    /// Keep processing after per-file failures
    #[arg(long)]
    keep_going: bool,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args)]
struct QaArgs {
    /// Directory of annotation CSV files
    input: PathBuf,
    /// Keep processing after per-file failures
    #[arg(long)]
    keep_going: bool,
    /// Balance yes/no detection questions per clip
    #[arg(long)]
    balance_type1: bool,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args)]
struct ScoreArgs {
    /// Ground-truth QA dataset (JSONL)
    ground_truth: PathBuf,
    /// Predictions (JSONL, one {question_id, answer} per line)
    predictions: PathBuf,
    /// Write the structured report JSON here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Average P/R/F1 over question types instead of over questions
    #[arg(long = "macro")]
    macro_averaged: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of recordings to emit
    #[arg(long, default_value_t = 10)]
    recordings: usize,
    /// Clips per recording
    #[arg(long, default_value_t = 10)]
    clips: usize,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args)]
struct LossCheckArgs {
    /// Gradient-check trials
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Ranking margin override
    #[arg(long)]
    margin: Option<f64>,
    #[command(flatten)]
    shared: SharedArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn fatal(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn from_pipeline(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Io { .. } | PipelineError::Ingest(IngestError::Io { .. }) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Caption(args) => cmd_caption(args),
        Command::Qa(args) => cmd_qa(args),
        Command::Score(args) => cmd_score(args),
        Command::Synth(args) => cmd_synth(args),
        Command::LossCheck(args) => cmd_loss_check(args),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_vocab(resolved: &Resolved) -> Result<ClassVocabulary, Failure> {
    match &resolved.vocab {
        Some(path) => ClassVocabulary::load(path)
            .map_err(|e| Failure::fatal(format!("{}: {e}", path.display()))),
        None => Ok(ClassVocabulary::starss23()),
    }
}

fn pipeline_config(
    resolved: &Resolved,
    keep_going: bool,
    balance_type1: bool,
) -> Result<PipelineConfig, Failure> {
    Ok(PipelineConfig {
        vocab: load_vocab(resolved)?,
        tolerances: resolved.tolerances,
        convention: resolved.convention,
        seed: resolved.seed,
        jobs: resolved.jobs,
        keep_going,
        balance_type1,
    })
}

/// Remote client when an endpoint is configured and `--offline` is not set.
/// The API key comes from the environment only.
fn remote_client(resolved: &Resolved) -> Result<Option<HttpRephraseClient>, Failure> {
    if resolved.offline {
        return Ok(None);
    }
    match (&resolved.endpoint, &resolved.model) {
        (Some(endpoint), Some(model)) => {
            let key = std::env::var(API_KEY_VAR).map_err(|_| {
                Failure::fatal(format!(
                    "{API_KEY_VAR} must be set to use the rephrase endpoint \
                     (the key is read from the environment only)"
                ))
            })?;
            let client = HttpRephraseClient::new(endpoint.clone(), model.clone(), key)
                .map_err(|e| Failure::fatal(e.to_string()))?;
            Ok(Some(client))
        }
        (Some(_), None) | (None, Some(_)) => Err(Failure::fatal(
            "rephrase endpoint and model must be configured together",
        )),
        (None, None) => Ok(None),
    }
}

fn warn_if_empty(recordings: usize, failures: usize, input: &std::path::Path) {
    if recordings == 0 && failures == 0 {
        eprintln!("warning: no .csv inputs under {}", input.display());
    }
}

fn report_failures(failures: &[String]) -> ExitCode {
    if failures.is_empty() {
        return ExitCode::SUCCESS;
    }
    for failure in failures {
        eprintln!("warning: {failure}");
    }
    eprintln!("warning: {} input file(s) failed", failures.len());
    ExitCode::from(1)
}

fn cmd_caption(args: CaptionArgs) -> Result<ExitCode, Failure> {
    let resolved = args.shared.resolve()?;
    let cfg = pipeline_config(&resolved, args.keep_going, false)?;
    let rephraser = match remote_client(&resolved)? {
        Some(client) => Rephraser::Remote(Box::new(client)),
        None => Rephraser::Offline,
    };
    let out_dir = resolved.out.unwrap_or_else(|| PathBuf::from("captions"));
    let summary = run_caption(&args.input, &out_dir, &cfg, Some(&rephraser))
        .map_err(Failure::from_pipeline)?;
    warn_if_empty(summary.recordings, summary.failures.len(), &args.input);
    println!(
        "captioned {} recordings: {} clips, {} captions ({} rephrased via {}) -> {}",
        summary.recordings,
        summary.clips,
        summary.captions,
        summary.rephrased,
        rephraser.provider(),
        out_dir.display()
    );
    Ok(report_failures(&summary.failures))
}

fn cmd_qa(args: QaArgs) -> Result<ExitCode, Failure> {
    let resolved = args.shared.resolve()?;
    let cfg = pipeline_config(&resolved, args.keep_going, args.balance_type1)?;
    let client = remote_client(&resolved)?;
    let backend = client.as_ref().map(|c| c as &dyn RemoteRephrase);
    let out_path = resolved.out.unwrap_or_else(|| PathBuf::from("qa.jsonl"));
    let summary = run_qa(&args.input, &out_path, &cfg, backend).map_err(Failure::from_pipeline)?;
    warn_if_empty(summary.recordings, summary.failures.len(), &args.input);
    println!(
        "generated {} questions for {} clips ({} recordings) -> {}",
        summary.questions,
        summary.clips,
        summary.recordings,
        out_path.display()
    );
    for (qtype, count) in &summary.per_type {
        println!("  type {qtype}: {count}");
    }
    for fallback in &summary.variant_fallbacks {
        eprintln!("warning: remote variants failed, using offline bank: {fallback}");
    }
    Ok(report_failures(&summary.failures))
}

fn cmd_score(args: ScoreArgs) -> Result<ExitCode, Failure> {
    let (report, rendered) = run_score(
        &args.ground_truth,
        &args.predictions,
        args.report.as_deref(),
        args.macro_averaged,
    )
    .map_err(Failure::from_pipeline)?;
    print!("{rendered}");
    if report.issues.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode, Failure> {
    let resolved = args.shared.resolve()?;
    let vocab = load_vocab(&resolved)?;
    if vocab.len() < 4 {
        return Err(Failure::fatal(
            "synthetic scenes draw from the first 4 classes; the vocabulary needs at least 4",
        ));
    }
    let out_dir = resolved
        .out
        .unwrap_or_else(|| PathBuf::from("synth_corpus"));
    let summary = run_synth(&out_dir, args.recordings, args.clips, resolved.seed, &vocab)
        .map_err(Failure::from_pipeline)?;
    println!(
        "emitted {} recordings ({} clips, {} annotated frames) -> {}",
        summary.recordings,
        summary.clips,
        summary.frames,
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_loss_check(args: LossCheckArgs) -> Result<ExitCode, Failure> {
    let resolved = args.shared.resolve()?;
    let mut cfg = LossConfig::default();
    if let Some(margin) = args.margin {
        cfg.margin = margin;
    }
    cfg.validate().map_err(|e| Failure::fatal(e.to_string()))?;
    let results = run_loss_checks(&cfg, resolved.seed, args.trials);
    let mut all_passed = true;
    for r in &results {
        println!(
            "{} {} ({})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_passed &= r.passed;
    }
    if all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
