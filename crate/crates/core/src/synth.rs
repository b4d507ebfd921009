//! Seeded synthetic scenes and an independent brute-force answer oracle.
//!
//! The oracle recomputes every answer directly from raw frames with naive
//! scans and full sorts, sharing nothing with the instance pipeline beyond
//! the domain types, so a bug would have to be made twice to go unnoticed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instances::Tolerances;
use crate::qa::{Answer, AzimuthConvention};
use crate::scene::{ClassVocabulary, Clip, FrameAnnotation, SceneError, CLIP_FRAMES};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("segment {onset}..{offset} ends before it starts")]
    BadSegment { onset: u32, offset: u32 },
    #[error("segment end {offset} outside clip of {len} frames")]
    SegmentOutOfClip { offset: u32, len: u32 },
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// How a synthetic source occupies space over time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionProfile {
    Static {
        azimuth: i32,
        elevation: i32,
        distance: u32,
    },
    /// Azimuth moves linearly from `from` to `to` across each segment.
    AzimuthSweep {
        from: i32,
        to: i32,
        elevation: i32,
        distance: u32,
    },
    /// Distance moves linearly from `from` to `to` across each segment.
    DistanceSweep {
        azimuth: i32,
        elevation: i32,
        from: u32,
        to: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub source_id: u32,
    pub class_idx: usize,
    /// Inclusive frame spans during which the source is audible.
    pub segments: Vec<(u32, u32)>,
    pub profile: MotionProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub clip_id: String,
    pub clip_len_frames: u32,
    pub sources: Vec<SourceSpec>,
}

fn lerp_round(from: f64, to: f64, t: f64) -> f64 {
    (from + (to - from) * t).round()
}

impl SceneSpec {
    /// Materialize the scene into a validated clip. Overlapping segments of
    /// the same (class, source) are merged, later sources winning conflicts.
    pub fn generate(&self, vocab: &ClassVocabulary) -> Result<Clip, SynthError> {
        let mut frames: BTreeMap<(u32, usize, u32), FrameAnnotation> = BTreeMap::new();
        for source in &self.sources {
            for &(onset, offset) in &source.segments {
                if offset < onset {
                    return Err(SynthError::BadSegment { onset, offset });
                }
                if offset >= self.clip_len_frames {
                    return Err(SynthError::SegmentOutOfClip {
                        offset,
                        len: self.clip_len_frames,
                    });
                }
                let span = (offset - onset) as f64;
                for frame in onset..=offset {
                    let t = if span == 0.0 {
                        0.0
                    } else {
                        (frame - onset) as f64 / span
                    };
                    let (az, el, dist) = match source.profile {
                        MotionProfile::Static {
                            azimuth,
                            elevation,
                            distance,
                        } => (azimuth, elevation, distance),
                        MotionProfile::AzimuthSweep {
                            from,
                            to,
                            elevation,
                            distance,
                        } => (
                            lerp_round(from as f64, to as f64, t) as i32,
                            elevation,
                            distance,
                        ),
                        MotionProfile::DistanceSweep {
                            azimuth,
                            elevation,
                            from,
                            to,
                        } => (
                            azimuth,
                            elevation,
                            lerp_round(from as f64, to as f64, t) as u32,
                        ),
                    };
                    let ann = FrameAnnotation::new(
                        frame,
                        source.class_idx,
                        source.source_id,
                        az,
                        el,
                        dist,
                        vocab,
                    )?;
                    frames.insert((frame, source.class_idx, source.source_id), ann);
                }
            }
        }
        Ok(Clip::new(
            self.clip_id.clone(),
            "synthetic".to_string(),
            0,
            self.clip_len_frames,
            frames.into_values().collect(),
        )?)
    }

    /// A random scene: up to 6 sources drawn from 4 classes, 1 to 3 audible
    /// segments each, with static, azimuth-sweep, and distance-sweep motion.
    /// Half the positions come from coarse grids so ties are common.
    pub fn random(seed: u64, clip_id: String) -> Self {
        fn pick(
            rng: &mut ChaCha8Rng,
            grid: &[i32],
            fine: std::ops::Range<i32>,
            coarse: bool,
        ) -> i32 {
            if coarse {
                grid[rng.gen_range(0..grid.len())]
            } else {
                rng.gen_range(fine)
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_sources = rng.gen_range(0..=6);
        let sources = (0..n_sources)
            .map(|i| {
                let class_idx = rng.gen_range(0..4);
                let n_segments = rng.gen_range(1..=3);
                let segments = (0..n_segments)
                    .map(|_| {
                        let onset = rng.gen_range(0..CLIP_FRAMES - 10);
                        let len = rng.gen_range(1..=15);
                        (onset, (onset + len - 1).min(CLIP_FRAMES - 1))
                    })
                    .collect();
                let coarse = rng.gen_bool(0.5);
                let az = pick(&mut rng, &[-90, -45, 0, 45, 90], -179..180, coarse);
                let az_to = pick(&mut rng, &[-90, -45, 0, 45, 90], -179..180, coarse);
                let el = pick(&mut rng, &[-45, 0, 45], -90..91, coarse);
                let d = pick(&mut rng, &[100, 200, 300], 50..500, coarse) as u32;
                let d_to = pick(&mut rng, &[100, 200, 300], 50..500, coarse) as u32;
                let profile = match rng.gen_range(0..4) {
                    0 | 1 => MotionProfile::Static {
                        azimuth: az,
                        elevation: el,
                        distance: d,
                    },
                    2 => MotionProfile::AzimuthSweep {
                        from: az,
                        // sometimes a sweep small enough to stay within tolerance
                        to: if rng.gen_bool(0.3) {
                            (az + 4).min(179)
                        } else {
                            az_to
                        },
                        elevation: el,
                        distance: d,
                    },
                    _ => MotionProfile::DistanceSweep {
                        azimuth: az,
                        elevation: el,
                        from: d,
                        to: if rng.gen_bool(0.3) { d + 8 } else { d_to },
                    },
                };
                SourceSpec {
                    source_id: i + 1,
                    class_idx,
                    segments,
                    profile,
                }
            })
            .collect();
        Self {
            clip_id,
            clip_len_frames: CLIP_FRAMES,
            sources,
        }
    }
}

/// Generate a random clip directly.
pub fn random_clip(seed: u64, clip_id: String, vocab: &ClassVocabulary) -> Clip {
    SceneSpec::random(seed, clip_id)
        .generate(vocab)
        .expect("random scenes are valid by construction")
}

/// Render a clip's annotations as ingest-format CSV rows, shifting frames
/// by `frame_offset` so several clips can be concatenated into a recording.
pub fn clip_rows_csv(clip: &Clip, frame_offset: u32) -> String {
    let mut out = String::new();
    for f in &clip.frames {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f.frame + frame_offset,
            f.class_idx,
            f.source_id,
            f.azimuth_deg,
            f.elevation_deg,
            f.distance_cm
        ));
    }
    out
}

/// Per-class first appearance computed the naive way: minimum frame, then
/// minimum source id at that frame, then a linear walk of that source's
/// contiguous frames.
struct NaiveFirst {
    class_idx: usize,
    first_frame: u32,
    azimuth: i32,
    elevation: i32,
    distance: u32,
    moving: bool,
}

fn naive_first_appearances(clip: &Clip, tol: &Tolerances) -> Vec<NaiveFirst> {
    let mut classes: Vec<usize> = clip.frames.iter().map(|f| f.class_idx).collect();
    classes.sort_unstable();
    classes.dedup();

    let mut out = Vec::new();
    for c in classes {
        let first_frame = clip
            .frames
            .iter()
            .filter(|f| f.class_idx == c)
            .map(|f| f.frame)
            .min()
            .expect("class is active");
        let source = clip
            .frames
            .iter()
            .filter(|f| f.class_idx == c && f.frame == first_frame)
            .map(|f| f.source_id)
            .min()
            .expect("frame exists");
        let at = |frame: u32| {
            clip.frames
                .iter()
                .find(|f| f.class_idx == c && f.source_id == source && f.frame == frame)
        };
        let start = at(first_frame).expect("frame exists");

        let mut frame = first_frame;
        let (mut az_min, mut az_max) = (start.azimuth_deg, start.azimuth_deg);
        let (mut el_min, mut el_max) = (start.elevation_deg, start.elevation_deg);
        let (mut d_min, mut d_max) = (start.distance_cm, start.distance_cm);
        while let Some(f) = at(frame) {
            az_min = az_min.min(f.azimuth_deg);
            az_max = az_max.max(f.azimuth_deg);
            el_min = el_min.min(f.elevation_deg);
            el_max = el_max.max(f.elevation_deg);
            d_min = d_min.min(f.distance_cm);
            d_max = d_max.max(f.distance_cm);
            frame += 1;
        }
        let moving = (az_max - az_min) as f64 > tol.azimuth_deg
            || (el_max - el_min) as f64 > tol.elevation_deg
            || (d_max - d_min) as f64 > tol.distance_cm;
        out.push(NaiveFirst {
            class_idx: c,
            first_frame,
            azimuth: start.azimuth_deg,
            elevation: start.elevation_deg,
            distance: start.distance_cm,
            moving,
        });
    }
    out.sort_by_key(|n| (n.first_frame, n.class_idx));
    out
}

/// Every Type I–V answer recomputed directly from raw frames, keyed by
/// question id.
pub fn brute_force_answers(
    clip: &Clip,
    vocab: &ClassVocabulary,
    tol: &Tolerances,
    convention: AzimuthConvention,
) -> Vec<(String, Answer)> {
    let id = &clip.clip_id;
    let firsts = naive_first_appearances(clip, tol);
    let mut out = Vec::new();

    for c in 0..vocab.len() {
        let slug = vocab.slug(c).expect("index in range");
        let active = clip.frames.iter().any(|f| f.class_idx == c);
        out.push((format!("{id}:I:{slug}:0"), Answer::YesNo(active)));
    }

    let onset_order: Vec<usize> = firsts.iter().map(|n| n.class_idx).collect();
    out.push((
        format!("{id}:II:active:0"),
        Answer::ClassSet(onset_order.clone()),
    ));

    let stationary: Vec<usize> = firsts
        .iter()
        .filter(|n| !n.moving)
        .map(|n| n.class_idx)
        .collect();
    let moving: Vec<usize> = firsts
        .iter()
        .filter(|n| n.moving)
        .map(|n| n.class_idx)
        .collect();
    out.push((
        format!("{id}:III:stationary:0"),
        Answer::ClassSet(stationary),
    ));
    out.push((format!("{id}:III:moving:0"), Answer::ClassSet(moving)));

    let sorted_by = |value: fn(&NaiveFirst) -> i64, descending: bool| -> Vec<usize> {
        let mut v: Vec<(i64, usize)> = firsts
            .iter()
            .map(|n| (if descending { -value(n) } else { value(n) }, n.class_idx))
            .collect();
        v.sort();
        v.into_iter().map(|(_, c)| c).collect()
    };
    let az = |n: &NaiveFirst| n.azimuth as i64;
    let el = |n: &NaiveFirst| n.elevation as i64;
    let dist = |n: &NaiveFirst| n.distance as i64;

    if !firsts.is_empty() {
        let (left, right) = match convention {
            AzimuthConvention::LeftPositive => (sorted_by(az, true)[0], sorted_by(az, false)[0]),
            AzimuthConvention::RightPositive => (sorted_by(az, false)[0], sorted_by(az, true)[0]),
        };
        let extremes = [
            ("leftmost", left),
            ("rightmost", right),
            ("topmost", sorted_by(el, true)[0]),
            ("bottommost", sorted_by(el, false)[0]),
            ("nearest", sorted_by(dist, false)[0]),
            ("farthest", sorted_by(dist, true)[0]),
        ];
        for (subtype, class) in extremes {
            out.push((
                format!("{id}:III:{subtype}:0"),
                Answer::ClassRanking(vec![class]),
            ));
        }
    }

    if firsts.len() >= 2 {
        let rankings = [
            ("azimuth_asc", sorted_by(az, false)),
            ("azimuth_desc", sorted_by(az, true)),
            ("elevation_asc", sorted_by(el, false)),
            ("elevation_desc", sorted_by(el, true)),
            ("distance_asc", sorted_by(dist, false)),
            ("distance_desc", sorted_by(dist, true)),
        ];
        for (subtype, order) in rankings {
            out.push((format!("{id}:IV:{subtype}:0"), Answer::ClassRanking(order)));
        }
        out.push((
            format!("{id}:V:appearance:0"),
            Answer::ClassRanking(onset_order),
        ));
    }

    out
}
