//! Core domain types shared by every stage of the pipeline.
//!
//! All types are immutable after construction; constructors validate their
//! invariants and reject bad data up front.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Frames are spaced 100 ms apart.
pub const FRAME_SECONDS: f64 = 0.1;

/// Frames per 10-second clip.
pub const CLIP_FRAMES: u32 = 100;

/// Convert a frame index to seconds on the 0.1 s grid.
///
/// Divides rather than multiplying by 0.1 so the result is the f64 nearest
/// to the decimal value (e.g. frame 3 gives exactly the literal `0.3`).
pub fn frame_to_seconds(frame: u32) -> f64 {
    frame as f64 / 10.0
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("vocabulary label {0} is empty")]
    EmptyLabel(usize),
    #[error("vocabulary label {0:?} appears more than once")]
    DuplicateLabel(String),
    #[error("class index {class_idx} out of range for vocabulary of {n} classes")]
    ClassOutOfRange { class_idx: usize, n: usize },
    #[error("azimuth {0} outside [-180, 180)")]
    AzimuthOutOfRange(i32),
    #[error("elevation {0} outside [-90, 90]")]
    ElevationOutOfRange(i32),
    #[error("frame {frame} outside clip of {length_frames} frames")]
    FrameOutsideClip { frame: u32, length_frames: u32 },
    #[error("clip length {0} exceeds {CLIP_FRAMES} frames")]
    ClipTooLong(u32),
    #[error("duplicate annotation for frame {frame}, class {class_idx}, source {source_id}")]
    DuplicateAnnotation {
        frame: u32,
        class_idx: usize,
        source_id: u32,
    },
    #[error("failed to read vocabulary: {0}")]
    Io(#[from] std::io::Error),
}

/// Ordered set of sound event class display names.
///
/// Class indices are positions in this list; annotation files refer to
/// classes by index, while captions, questions, and answer files use the
/// display labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVocabulary {
    labels: Vec<String>,
}

impl ClassVocabulary {
    pub fn new(labels: Vec<String>) -> Result<Self, SceneError> {
        for (i, label) in labels.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(SceneError::EmptyLabel(i));
            }
            if labels[..i].contains(label) {
                return Err(SceneError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// The 13 sound event classes of the STARSS23 recordings, in annotation
    /// index order. Any other class set can be loaded from a vocabulary file.
    pub fn starss23() -> Self {
        let labels = [
            "woman speaking",
            "man speaking",
            "clapping",
            "telephone ringing",
            "laughing",
            "domestic sounds",
            "footsteps",
            "door open or close",
            "music",
            "musical instrument",
            "water tap",
            "bell",
            "knock",
        ];
        Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Number of classes, `N`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, class_idx: usize) -> Option<&str> {
        self.labels.get(class_idx).map(|s| s.as_str())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Identifier-safe form of a label: spaces become underscores.
    pub fn slug(&self, class_idx: usize) -> Option<String> {
        self.label(class_idx).map(|l| l.replace(' ', "_"))
    }

    /// Load a vocabulary file: one display label per line, class index =
    /// line position. Blank lines and lines starting with `#` are skipped.
    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SceneError> {
        let labels = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        Self::new(labels)
    }

    /// Render the file representation; `parse` of the output reproduces the
    /// vocabulary exactly.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for label in &self.labels {
            out.push_str(label);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), SceneError> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }
}

/// One annotated 100 ms frame: what sounds, from which source, and where.
///
/// `frame` is in units of 100 ms; whether it is recording-absolute or
/// clip-local depends on the container. Angles are signed degrees with
/// azimuth in [-180, 180) and elevation in [-90, 90]; distance is in
/// centimeters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameAnnotation {
    pub frame: u32,
    pub class_idx: usize,
    pub source_id: u32,
    pub azimuth_deg: i32,
    pub elevation_deg: i32,
    pub distance_cm: u32,
}

impl FrameAnnotation {
    pub fn new(
        frame: u32,
        class_idx: usize,
        source_id: u32,
        azimuth_deg: i32,
        elevation_deg: i32,
        distance_cm: u32,
        vocab: &ClassVocabulary,
    ) -> Result<Self, SceneError> {
        if class_idx >= vocab.len() {
            return Err(SceneError::ClassOutOfRange {
                class_idx,
                n: vocab.len(),
            });
        }
        if !(-180..180).contains(&azimuth_deg) {
            return Err(SceneError::AzimuthOutOfRange(azimuth_deg));
        }
        if !(-90..=90).contains(&elevation_deg) {
            return Err(SceneError::ElevationOutOfRange(elevation_deg));
        }
        Ok(Self {
            frame,
            class_idx,
            source_id,
            azimuth_deg,
            elevation_deg,
            distance_cm,
        })
    }

    /// Sort key used everywhere annotations are ordered canonically.
    pub fn sort_key(&self) -> (u32, usize, u32) {
        (self.frame, self.class_idx, self.source_id)
    }
}

/// A 10-second (or shorter, final) segment of a recording.
///
/// Frames are clip-local: frame 0 is the clip start. `start_frame` records
/// where the clip sits in the recording.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clip {
    pub clip_id: String,
    pub recording_id: String,
    pub start_frame: u32,
    pub length_frames: u32,
    pub frames: Vec<FrameAnnotation>,
}

impl Clip {
    /// Build a clip, validating frame bounds, uniqueness, and canonical order.
    pub fn new(
        clip_id: String,
        recording_id: String,
        start_frame: u32,
        length_frames: u32,
        mut frames: Vec<FrameAnnotation>,
    ) -> Result<Self, SceneError> {
        if length_frames > CLIP_FRAMES {
            return Err(SceneError::ClipTooLong(length_frames));
        }
        frames.sort_by_key(FrameAnnotation::sort_key);
        for (i, f) in frames.iter().enumerate() {
            if f.frame >= length_frames {
                return Err(SceneError::FrameOutsideClip {
                    frame: f.frame,
                    length_frames,
                });
            }
            if i > 0 && frames[i - 1].sort_key() == f.sort_key() {
                return Err(SceneError::DuplicateAnnotation {
                    frame: f.frame,
                    class_idx: f.class_idx,
                    source_id: f.source_id,
                });
            }
        }
        Ok(Self {
            clip_id,
            recording_id,
            start_frame,
            length_frames,
            frames,
        })
    }

    pub fn is_silent(&self) -> bool {
        self.frames.is_empty()
    }
}

/// A value together with the time (seconds) at which it was observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatPoint {
    pub value: f64,
    pub time_s: f64,
}

/// Summary of one spatial dimension over an instance's lifetime.
///
/// `min`/`max` carry the time of their first occurrence. `mean` backs the
/// "approximately X" phrasing used for static dimensions. A dimension is
/// static when its full range fits within the configured tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStat {
    pub initial: StatPoint,
    pub last: StatPoint,
    pub min: StatPoint,
    pub max: StatPoint,
    pub mean: f64,
    pub is_static: bool,
}

/// A maximal temporally contiguous run of one (class, source) pair within a
/// clip, with per-dimension trajectory summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventInstance {
    pub clip_id: String,
    pub class_idx: usize,
    pub source_id: u32,
    /// Ordinal among instances of the same (class, source) in this clip.
    pub instance_idx: u32,
    pub onset_s: f64,
    pub offset_s: f64,
    pub azimuth: TrajectoryStat,
    pub elevation: TrajectoryStat,
    pub distance: TrajectoryStat,
    pub is_moving: bool,
}

impl fmt::Display for EventInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} class={} source={} #{} [{:.1}s..{:.1}s]",
            self.clip_id,
            self.class_idx,
            self.source_id,
            self.instance_idx,
            self.onset_s,
            self.offset_s
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starss23_vocabulary_has_13_classes() {
        let vocab = ClassVocabulary::starss23();
        assert_eq!(vocab.len(), 13);
        assert_eq!(vocab.label(1), Some("man speaking"));
        assert_eq!(vocab.index_of("bell"), Some(11));
    }

    #[test]
    fn vocabulary_rejects_duplicates_and_empties() {
        assert!(ClassVocabulary::new(vec!["a".into(), "a".into()]).is_err());
        assert!(ClassVocabulary::new(vec!["a".into(), "".into()]).is_err());
    }

    #[test]
    fn vocabulary_file_round_trip() {
        let vocab = ClassVocabulary::starss23();
        let text = vocab.to_file_string();
        let back = ClassVocabulary::parse(&text).unwrap();
        assert_eq!(vocab, back);
    }

    #[test]
    fn vocabulary_parse_skips_comments_and_blanks() {
        let vocab = ClassVocabulary::parse("# header\n\nbell\n  knock  \n").unwrap();
        assert_eq!(vocab.labels(), &["bell".to_string(), "knock".to_string()]);
    }

    #[test]
    fn frame_annotation_validates_ranges() {
        let vocab = ClassVocabulary::starss23();
        assert!(FrameAnnotation::new(0, 0, 0, -180, 0, 0, &vocab).is_ok());
        assert!(FrameAnnotation::new(0, 0, 0, 180, 0, 0, &vocab).is_err());
        assert!(FrameAnnotation::new(0, 0, 0, 0, 91, 0, &vocab).is_err());
        assert!(FrameAnnotation::new(0, 0, 0, 0, -91, 0, &vocab).is_err());
        assert!(FrameAnnotation::new(0, 13, 0, 0, 0, 0, &vocab).is_err());
    }

    #[test]
    fn clip_rejects_out_of_bounds_and_duplicate_frames() {
        let vocab = ClassVocabulary::starss23();
        let f = FrameAnnotation::new(5, 0, 0, 0, 0, 100, &vocab).unwrap();
        assert!(Clip::new("c".into(), "r".into(), 0, 5, vec![f]).is_err());
        assert!(Clip::new("c".into(), "r".into(), 0, 10, vec![f, f]).is_err());
        assert!(Clip::new("c".into(), "r".into(), 0, 10, vec![f]).is_ok());
    }

    #[test]
    fn clip_sorts_frames_canonically() {
        let vocab = ClassVocabulary::starss23();
        let a = FrameAnnotation::new(5, 0, 0, 0, 0, 100, &vocab).unwrap();
        let b = FrameAnnotation::new(2, 1, 3, 10, 5, 200, &vocab).unwrap();
        let clip = Clip::new("c".into(), "r".into(), 0, 10, vec![a, b]).unwrap();
        assert_eq!(clip.frames[0], b);
        assert_eq!(clip.frames[1], a);
    }

    #[test]
    fn slug_replaces_spaces() {
        let vocab = ClassVocabulary::starss23();
        assert_eq!(vocab.slug(7).unwrap(), "door_open_or_close");
    }
}
