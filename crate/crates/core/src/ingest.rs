//! Reading frame-level annotation files and cutting recordings into clips.
//!
//! Annotation files are CSV with one frame event per line:
//! `frame,class,source,azimuth,elevation,distance`. All six fields are
//! integers; frames are 100 ms apart and recording-absolute. The file stem
//! names the recording.

use std::path::Path;

use thiserror::Error;

use crate::scene::{ClassVocabulary, Clip, FrameAnnotation, SceneError, CLIP_FRAMES};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}: expected 6 comma-separated fields, found {found}")]
    FieldCount {
        path: String,
        line: usize,
        found: usize,
    },
    #[error("{path}:{line}: field {field}: {value:?} is not a valid integer")]
    BadInteger {
        path: String,
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("{path}:{line}: field {field}: {value} out of range")]
    OutOfRange {
        path: String,
        line: usize,
        field: &'static str,
        value: i64,
    },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: String,
        line: usize,
        source: SceneError,
    },
    #[error(
        "{path}:{line}: duplicate annotation for frame {frame}, class {class}, source {source_id}"
    )]
    Duplicate {
        path: String,
        line: usize,
        frame: u32,
        class: usize,
        source_id: u32,
    },
    #[error("{path}: file has no stem to use as recording id")]
    NoStem { path: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A full recording: id plus annotations in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recording {
    pub recording_id: String,
    pub frames: Vec<FrameAnnotation>,
}

const FIELD_NAMES: [&str; 6] = [
    "frame",
    "class",
    "source",
    "azimuth",
    "elevation",
    "distance",
];

fn parse_line(
    path: &str,
    line_no: usize,
    line: &str,
    vocab: &ClassVocabulary,
) -> Result<FrameAnnotation, IngestError> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 6 {
        return Err(IngestError::FieldCount {
            path: path.to_string(),
            line: line_no,
            found: fields.len(),
        });
    }
    let mut values = [0i64; 6];
    for (i, raw) in fields.iter().enumerate() {
        values[i] = raw.parse().map_err(|_| IngestError::BadInteger {
            path: path.to_string(),
            line: line_no,
            field: FIELD_NAMES[i],
            value: raw.to_string(),
        })?;
    }
    let unsigned = |i: usize| -> Result<u32, IngestError> {
        u32::try_from(values[i]).map_err(|_| IngestError::OutOfRange {
            path: path.to_string(),
            line: line_no,
            field: FIELD_NAMES[i],
            value: values[i],
        })
    };
    let frame = unsigned(0)?;
    let class_idx = usize::try_from(values[1]).map_err(|_| IngestError::OutOfRange {
        path: path.to_string(),
        line: line_no,
        field: "class",
        value: values[1],
    })?;
    let source_id = unsigned(2)?;
    let azimuth = i32::try_from(values[3]).map_err(|_| IngestError::OutOfRange {
        path: path.to_string(),
        line: line_no,
        field: "azimuth",
        value: values[3],
    })?;
    let elevation = i32::try_from(values[4]).map_err(|_| IngestError::OutOfRange {
        path: path.to_string(),
        line: line_no,
        field: "elevation",
        value: values[4],
    })?;
    let distance = unsigned(5)?;
    FrameAnnotation::new(
        frame, class_idx, source_id, azimuth, elevation, distance, vocab,
    )
    .map_err(|source| IngestError::Invalid {
        path: path.to_string(),
        line: line_no,
        source,
    })
}

/// Parse annotation CSV text into a recording.
///
/// `path` is used for error messages and, via its stem, as the recording id.
/// Lines are 1-indexed in errors. Duplicate (frame, class, source) triples
/// are rejected; output is sorted by (frame, class, source).
pub fn parse_recording(
    path: &Path,
    text: &str,
    vocab: &ClassVocabulary,
) -> Result<Recording, IngestError> {
    let path_str = path.display().to_string();
    let recording_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| IngestError::NoStem {
            path: path_str.clone(),
        })?;

    let mut frames = Vec::new();
    let mut lines_of = std::collections::HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let ann = parse_line(&path_str, line_no, line, vocab)?;
        if let Some(_prev) = lines_of.insert(ann.sort_key(), line_no) {
            return Err(IngestError::Duplicate {
                path: path_str,
                line: line_no,
                frame: ann.frame,
                class: ann.class_idx,
                source_id: ann.source_id,
            });
        }
        frames.push(ann);
    }
    frames.sort_by_key(FrameAnnotation::sort_key);
    Ok(Recording {
        recording_id,
        frames,
    })
}

/// Read and parse one annotation file.
pub fn load_recording(path: &Path, vocab: &ClassVocabulary) -> Result<Recording, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_recording(path, &text, vocab)
}

/// Cut a recording into consecutive 10-second clips.
///
/// Clip `k` covers absolute frames `[100k, 100k + 99]`; its annotations are
/// re-based so the clip starts at local frame 0. Every clip up to the one
/// containing the last annotated frame is emitted, including silent ones in
/// the middle. The final clip is truncated at the last annotated frame. An
/// empty recording yields no clips.
pub fn segment_into_clips(recording: &Recording) -> Vec<Clip> {
    let Some(last) = recording.frames.last() else {
        return Vec::new();
    };
    let max_frame = recording.frames.iter().map(|f| f.frame).max().unwrap_or(0);
    debug_assert!(last.frame == max_frame);
    let n_clips = max_frame / CLIP_FRAMES + 1;

    let mut buckets: Vec<Vec<FrameAnnotation>> = vec![Vec::new(); n_clips as usize];
    for ann in &recording.frames {
        let k = ann.frame / CLIP_FRAMES;
        let mut local = *ann;
        local.frame = ann.frame % CLIP_FRAMES;
        buckets[k as usize].push(local);
    }

    buckets
        .into_iter()
        .enumerate()
        .map(|(k, frames)| {
            let k = k as u32;
            let start_frame = k * CLIP_FRAMES;
            let length = if k == n_clips - 1 {
                max_frame - start_frame + 1
            } else {
                CLIP_FRAMES
            };
            Clip::new(
                format!("{}_clip{:03}", recording.recording_id, k),
                recording.recording_id.clone(),
                start_frame,
                length,
                frames,
            )
            .expect("frames validated at parse time stay valid after re-basing")
        })
        .collect()
}
