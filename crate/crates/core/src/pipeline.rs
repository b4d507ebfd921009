//! Batch drivers over directories of recordings: captioning, QA dataset
//! generation, scoring, and synthetic corpus emission.
//!
//! Every output file is written atomically (temp file + rename), so an
//! aborted run never leaves a truncated file behind; reruns with the same
//! inputs and seed produce byte-identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::captioner::{render_clip_captions, InstanceCaption};
use crate::fnv1a64;
use crate::ingest::{load_recording, segment_into_clips, IngestError};
use crate::instances::Tolerances;
use crate::qa::{
    balance_type1, generate_clip_items, remote_variants, AzimuthConvention, QaItem, QaRecord,
    QuestionType,
};
use crate::rephrase::{RemoteRephrase, RephraseError, Rephraser};
use crate::scene::{ClassVocabulary, CLIP_FRAMES};
use crate::scoring::{render_report, score_dataset, PredictionRecord, ScoreReport};
use crate::synth::{clip_rows_csv, random_clip};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Rephrase {
        path: String,
        #[source]
        source: RephraseError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Json {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Shared knobs for the batch drivers.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub vocab: ClassVocabulary,
    pub tolerances: Tolerances,
    pub convention: AzimuthConvention,
    pub seed: u64,
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
    /// Report per-file failures in the summary instead of aborting.
    pub keep_going: bool,
    /// Subsample "no" detection questions to match the "yes" count per clip.
    pub balance_type1: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            vocab: ClassVocabulary::starss23(),
            tolerances: Tolerances::default(),
            convention: AzimuthConvention::default(),
            seed: 0,
            jobs: None,
            keep_going: false,
            balance_type1: false,
        }
    }
}

fn with_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// All `.csv` files directly under `dir`, sorted by name. An empty listing
/// is not an error; callers decide how to report it.
pub fn list_csv_inputs(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err(dir))?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), PipelineError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Serialize items to JSON Lines and write the file atomically.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), PipelineError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("serializable record"));
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Read a JSON Lines file, skipping blank lines; parse errors carry the
/// 1-indexed line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line).map_err(|e| PipelineError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

#[derive(Debug, Default, Serialize)]
pub struct CaptionSummary {
    pub recordings: usize,
    pub clips: usize,
    pub captions: usize,
    pub rephrased: usize,
    pub failures: Vec<String>,
}

const REPHRASE_ATTEMPTS: usize = 3;

fn rephrase_with_retry(rephraser: &Rephraser, text: &str) -> Result<String, RephraseError> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match rephraser.rephrase(text) {
            Ok(p) => return Ok(p),
            Err(e) if e.is_retryable() && attempt < REPHRASE_ATTEMPTS => continue,
            Err(e) => return Err(e),
        }
    }
}

/// One captioned recording: output path, clip count, and the captions.
type CaptionedFile = (PathBuf, usize, Vec<InstanceCaption>);

fn caption_one(
    path: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    rephraser: Option<&Rephraser>,
) -> Result<CaptionedFile, PipelineError> {
    let recording = load_recording(path, &cfg.vocab)?;
    let clips = segment_into_clips(&recording);
    let mut captions = Vec::new();
    for clip in &clips {
        for mut caption in render_clip_captions(clip, &cfg.tolerances, &cfg.vocab) {
            if let Some(r) = rephraser {
                let text = rephrase_with_retry(r, &caption.text_rule).map_err(|source| {
                    PipelineError::Rephrase {
                        path: format!("{}:{}", clip.clip_id, caption.source_id),
                        source,
                    }
                })?;
                caption.text_rephrased = Some(text);
                caption.rephrase_provider = Some(r.provider().to_string());
            }
            captions.push(caption);
        }
    }
    let out_path = out_dir.join(format!("{}.captions.jsonl", recording.recording_id));
    write_jsonl(&out_path, &captions)?;
    Ok((out_path, clips.len(), captions))
}

/// Caption every recording in `input_dir`, one
/// `{recording_id}.captions.jsonl` per input file. With a rephraser, each
/// caption also carries its paraphrase; retryable backend errors are retried
/// a few times before counting as failures. Without `keep_going`, the first
/// failure aborts the run and removes the outputs it had already written.
pub fn run_caption(
    input_dir: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    rephraser: Option<&Rephraser>,
) -> Result<CaptionSummary, PipelineError> {
    let files = list_csv_inputs(input_dir)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let results: Vec<Result<CaptionedFile, PipelineError>> = with_pool(cfg.jobs, || {
        files
            .par_iter()
            .map(|path| caption_one(path, out_dir, cfg, rephraser))
            .collect()
    });

    if !cfg.keep_going {
        if let Some(pos) = results.iter().position(|r| r.is_err()) {
            for (out_path, _, _) in results.iter().flatten() {
                let _ = fs::remove_file(out_path);
            }
            return Err(results
                .into_iter()
                .nth(pos)
                .expect("position exists")
                .unwrap_err());
        }
    }

    let mut summary = CaptionSummary::default();
    for result in results {
        match result {
            Ok((_, clips, captions)) => {
                summary.recordings += 1;
                summary.clips += clips;
                summary.captions += captions.len();
                summary.rephrased += captions
                    .iter()
                    .filter(|c| c.text_rephrased.is_some())
                    .count();
            }
            Err(e) => summary.failures.push(e.to_string()),
        }
    }
    Ok(summary)
}

#[derive(Debug, Default, Serialize)]
pub struct QaSummary {
    pub recordings: usize,
    pub clips: usize,
    pub questions: usize,
    pub per_type: BTreeMap<String, usize>,
    /// Questions whose remote variants failed and fell back to the bank.
    pub variant_fallbacks: Vec<String>,
    pub failures: Vec<String>,
}

/// Generate the QA dataset for every recording in `input_dir` into a single
/// JSONL file sorted by (clip, type, subtype). Silent clips keep only their
/// Type I questions. With a remote variant backend, failures per question
/// fall back to the offline bank and are reported in the summary.
pub fn run_qa(
    input_dir: &Path,
    out_path: &Path,
    cfg: &PipelineConfig,
    variant_backend: Option<&dyn RemoteRephrase>,
) -> Result<QaSummary, PipelineError> {
    let files = list_csv_inputs(input_dir)?;
    let results: Vec<Result<(usize, Vec<QaItem>), PipelineError>> = with_pool(cfg.jobs, || {
        files
            .par_iter()
            .map(|path| {
                let recording = load_recording(path, &cfg.vocab)?;
                let clips = segment_into_clips(&recording);
                let mut items = Vec::new();
                for clip in &clips {
                    let clip_items = generate_clip_items(
                        clip,
                        &cfg.vocab,
                        &cfg.tolerances,
                        cfg.convention,
                        cfg.seed,
                    );
                    if clip.is_silent() {
                        items.extend(
                            clip_items
                                .into_iter()
                                .filter(|i| i.qtype == QuestionType::I),
                        );
                    } else {
                        items.extend(clip_items);
                    }
                }
                Ok((clips.len(), items))
            })
            .collect()
    });

    let mut summary = QaSummary::default();
    let mut items = Vec::new();
    for result in results {
        match result {
            Ok((clips, clip_items)) => {
                summary.recordings += 1;
                summary.clips += clips;
                items.extend(clip_items);
            }
            Err(e) if cfg.keep_going => summary.failures.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }

    if cfg.balance_type1 {
        items = balance_type1(items, cfg.seed);
    }
    if let Some(backend) = variant_backend {
        for item in &mut items {
            match remote_variants(item, backend) {
                Ok(variants) => item.variants = variants,
                Err(e) => summary
                    .variant_fallbacks
                    .push(format!("{}: {e}", item.question_id)),
            }
        }
    }
    items.sort_by(|a, b| (&a.clip_id, a.qtype, &a.subtype).cmp(&(&b.clip_id, b.qtype, &b.subtype)));

    summary.questions = items.len();
    for item in &items {
        *summary.per_type.entry(item.qtype.to_string()).or_insert(0) += 1;
    }
    let records: Vec<QaRecord> = items.iter().map(|i| i.to_record(&cfg.vocab)).collect();
    write_jsonl(out_path, &records)?;
    Ok(summary)
}

/// Score a prediction file against a QA dataset file. Returns the report
/// and its rendered table; optionally writes the report as JSON.
pub fn run_score(
    gt_path: &Path,
    pred_path: &Path,
    report_path: Option<&Path>,
    macro_averaged: bool,
) -> Result<(ScoreReport, String), PipelineError> {
    let gt: Vec<QaRecord> = read_jsonl(gt_path)?;
    let preds: Vec<PredictionRecord> = read_jsonl(pred_path)?;
    let report = score_dataset(&gt, &preds, macro_averaged);
    let rendered = render_report(&report);
    if let Some(path) = report_path {
        let json = serde_json::to_string_pretty(&report).expect("serializable report");
        write_atomic(path, &(json + "\n"))?;
    }
    Ok((report, rendered))
}

#[derive(Debug, Default, Serialize)]
pub struct SynthSummary {
    pub recordings: usize,
    pub clips: usize,
    pub frames: usize,
}

/// Emit a synthetic corpus: `recordings` CSV files named `synth{r:04}.csv`,
/// each the concatenation of `clips_per_recording` seeded random clips.
pub fn run_synth(
    out_dir: &Path,
    recordings: usize,
    clips_per_recording: usize,
    seed: u64,
    vocab: &ClassVocabulary,
) -> Result<SynthSummary, PipelineError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let frame_counts: Vec<Result<usize, PipelineError>> = (0..recordings)
        .into_par_iter()
        .map(|r| {
            let recording_id = format!("synth{r:04}");
            let mut rows = String::new();
            let mut frames = 0;
            for k in 0..clips_per_recording {
                let clip_seed = seed ^ fnv1a64(format!("{recording_id}:clip{k:03}").as_bytes());
                let clip = random_clip(clip_seed, format!("{recording_id}_clip{k:03}"), vocab);
                frames += clip.frames.len();
                rows.push_str(&clip_rows_csv(&clip, k as u32 * CLIP_FRAMES));
            }
            write_atomic(&out_dir.join(format!("{recording_id}.csv")), &rows)?;
            Ok(frames)
        })
        .collect();

    let mut summary = SynthSummary {
        recordings,
        clips: recordings * clips_per_recording,
        frames: 0,
    };
    for count in frame_counts {
        summary.frames += count?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::AnswerRecord;

    fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn caption_run_writes_per_recording_files() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in");
        fs::create_dir(&input).unwrap();
        write(&input, "rec1.csv", "2,1,2,-70,-46,97\n3,1,2,-75,-46,97\n");
        write(&input, "rec2.csv", "0,3,1,10,0,150\n");
        let out = tmp.path().join("out");

        let cfg = PipelineConfig::default();
        let summary = run_caption(&input, &out, &cfg, Some(&Rephraser::Offline)).unwrap();
        assert_eq!(summary.recordings, 2);
        assert_eq!(summary.captions, 2);
        assert_eq!(summary.rephrased, 2);
        assert!(summary.failures.is_empty());

        let captions: Vec<InstanceCaption> = read_jsonl(&out.join("rec1.captions.jsonl")).unwrap();
        assert_eq!(captions.len(), 1);
        assert!(captions[0].text_rule.starts_with("From 0.2s to 0.3s,"));
        let rephrased = captions[0].text_rephrased.as_deref().unwrap();
        assert!(
            rephrased.starts_with("Between 0.2s and 0.3s,"),
            "{rephrased}"
        );
        assert_eq!(captions[0].rephrase_provider.as_deref(), Some("offline"));
    }

    #[test]
    fn caption_run_is_byte_identical_across_reruns() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in");
        fs::create_dir(&input).unwrap();
        write(
            &input,
            "rec1.csv",
            "0,0,1,15,5,120\n1,0,1,18,5,121\n5,2,3,-40,0,300\n",
        );
        let out = tmp.path().join("out");

        let cfg = PipelineConfig::default();
        run_caption(&input, &out, &cfg, Some(&Rephraser::Offline)).unwrap();
        let first = fs::read(out.join("rec1.captions.jsonl")).unwrap();
        run_caption(&input, &out, &cfg, Some(&Rephraser::Offline)).unwrap();
        let second = fs::read(out.join("rec1.captions.jsonl")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn caption_run_keep_going_reports_bad_files() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in");
        fs::create_dir(&input).unwrap();
        write(&input, "bad.csv", "not,a,number,0,0,100\n");
        write(&input, "good.csv", "0,0,1,0,0,100\n");
        let out = tmp.path().join("out");

        let mut cfg = PipelineConfig::default();
        assert!(run_caption(&input, &out, &cfg, None).is_err());
        // aborting removes the outputs the run had already produced
        assert!(!out.join("good.captions.jsonl").exists());

        cfg.keep_going = true;
        let summary = run_caption(&input, &out, &cfg, None).unwrap();
        assert_eq!(summary.recordings, 1);
        assert_eq!(summary.failures.len(), 1);
        assert!(summary.failures[0].contains("bad.csv"));
        assert!(out.join("good.captions.jsonl").exists());
        assert!(!out.join("bad.captions.jsonl").exists());
    }

    #[test]
    fn empty_input_dir_yields_empty_summary() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("out");
        let summary = run_caption(tmp.path(), &out, &PipelineConfig::default(), None).unwrap();
        assert_eq!(summary.recordings, 0);
        assert_eq!(summary.captions, 0);

        let missing = tmp.path().join("nope");
        assert!(matches!(
            run_caption(&missing, &out, &PipelineConfig::default(), None),
            Err(PipelineError::Io { .. })
        ));
    }

    #[test]
    fn qa_run_sorts_and_counts() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in");
        fs::create_dir(&input).unwrap();
        // rec1 clip 0: two active classes; rec1 clip 1 silent; clip 2 active.
        write(
            &input,
            "rec1.csv",
            "0,0,1,30,0,100\n1,0,1,30,0,100\n5,2,2,-30,10,200\n205,1,1,0,0,150\n",
        );
        let out = tmp.path().join("qa.jsonl");

        let cfg = PipelineConfig::default();
        let summary = run_qa(&input, &out, &cfg, None).unwrap();
        assert_eq!(summary.recordings, 1);
        assert_eq!(summary.clips, 3);

        let records: Vec<QaRecord> = read_jsonl(&out).unwrap();
        assert_eq!(records.len(), summary.questions);
        // clip 0: 13 I + 1 II + 8 III + 6 IV + 1 V; clip 1 silent: 13 I;
        // clip 2: one active class: 13 I + 1 II + 8 III.
        assert_eq!(summary.per_type["I"], 39);
        assert_eq!(summary.per_type["II"], 2);
        assert_eq!(summary.per_type["III"], 16);
        assert_eq!(summary.per_type["IV"], 6);
        assert_eq!(summary.per_type["V"], 1);

        let sorted = {
            let mut keys: Vec<_> = records
                .iter()
                .map(|r| (r.clip_id.clone(), r.qtype, r.subtype.clone()))
                .collect();
            keys.sort();
            keys
        };
        let got: Vec<_> = records
            .iter()
            .map(|r| (r.clip_id.clone(), r.qtype, r.subtype.clone()))
            .collect();
        assert_eq!(got, sorted);

        let silent: Vec<_> = records
            .iter()
            .filter(|r| r.clip_id == "rec1_clip001")
            .collect();
        assert_eq!(silent.len(), 13);
        assert!(silent.iter().all(|r| r.qtype == QuestionType::I));
        assert!(silent
            .iter()
            .all(|r| r.answer == AnswerRecord::YesNo(crate::qa::YesNoValue::No)));
    }

    #[test]
    fn qa_run_balances_detection_questions() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in");
        fs::create_dir(&input).unwrap();
        write(&input, "rec1.csv", "0,0,1,30,0,100\n2,5,2,10,5,250\n");
        let out = tmp.path().join("qa.jsonl");

        let cfg = PipelineConfig {
            balance_type1: true,
            ..PipelineConfig::default()
        };
        let summary = run_qa(&input, &out, &cfg, None).unwrap();
        // 2 yes + 2 sampled no
        assert_eq!(summary.per_type["I"], 4);
    }

    #[test]
    fn score_run_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let gt = vec![QaRecord {
            question_id: "c:I:bell:0".into(),
            clip_id: "c".into(),
            qtype: QuestionType::I,
            subtype: "bell".into(),
            question_text: "Is there a sound event of a bell in the scene?".into(),
            variants: vec![],
            answer: AnswerRecord::YesNo(crate::qa::YesNoValue::Yes),
        }];
        let preds = vec![PredictionRecord {
            question_id: "c:I:bell:0".into(),
            answer: AnswerRecord::YesNo(crate::qa::YesNoValue::Yes),
        }];
        let gt_path = tmp.path().join("gt.jsonl");
        let pred_path = tmp.path().join("pred.jsonl");
        write_jsonl(&gt_path, &gt).unwrap();
        write_jsonl(&pred_path, &preds).unwrap();

        let report_path = tmp.path().join("report.json");
        let (report, rendered) =
            run_score(&gt_path, &pred_path, Some(&report_path), false).unwrap();
        assert_eq!(report.overall.tp, 1);
        assert_eq!(report.overall.f1, 1.0);
        assert!(rendered.contains("Overall"));

        let on_disk: ScoreReport =
            serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
        assert_eq!(on_disk.overall.tp, 1);
    }

    #[test]
    fn read_jsonl_reports_line_numbers() {
        let tmp = tempfile::tempdir().unwrap();
        let path = write(tmp.path(), "x.jsonl", "{\"question_id\":\"a\",\"answer\":{\"kind\":\"yes_no\",\"value\":\"yes\"}}\n\nnot json\n");
        let err = read_jsonl::<PredictionRecord>(&path).unwrap_err();
        match err {
            PipelineError::Json { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn synth_run_is_deterministic_and_ingestible() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("corpus");
        let vocab = ClassVocabulary::starss23();
        let summary = run_synth(&out, 3, 2, 42, &vocab).unwrap();
        assert_eq!(summary.recordings, 3);
        assert_eq!(summary.clips, 6);

        let first = fs::read(out.join("synth0001.csv")).unwrap();
        run_synth(&out, 3, 2, 42, &vocab).unwrap();
        let second = fs::read(out.join("synth0001.csv")).unwrap();
        assert_eq!(first, second);

        for r in 0..3 {
            let path = out.join(format!("synth{r:04}.csv"));
            let recording = load_recording(&path, &vocab).unwrap();
            assert_eq!(recording.recording_id, format!("synth{r:04}"));
        }

        assert!(summary.frames > 0);
        run_synth(&tmp.path().join("c2"), 3, 2, 43, &vocab).unwrap();
        let other = fs::read(tmp.path().join("c2/synth0001.csv")).unwrap();
        assert_ne!(other, first);
    }
}
