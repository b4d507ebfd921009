//! Extracting event instances from clip annotations.
//!
//! An instance is a maximal temporally contiguous run of frames sharing one
//! (class, source) pair. Contiguous means consecutive frame indices; a gap
//! of one missing frame or more starts a new instance.

use crate::scene::{
    frame_to_seconds, Clip, EventInstance, FrameAnnotation, StatPoint, TrajectoryStat,
};

/// Movement tolerances per dimension. A dimension whose full range within an
/// instance does not exceed the tolerance counts as static.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub distance_cm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            azimuth_deg: 5.0,
            elevation_deg: 5.0,
            distance_cm: 10.0,
        }
    }
}

fn dimension_stat(
    frames: &[FrameAnnotation],
    value: impl Fn(&FrameAnnotation) -> f64,
    tol: f64,
) -> TrajectoryStat {
    let point = |f: &FrameAnnotation| StatPoint {
        value: value(f),
        time_s: frame_to_seconds(f.frame),
    };
    let first = &frames[0];
    let last = &frames[frames.len() - 1];
    let mut min = point(first);
    let mut max = point(first);
    let mut sum = 0.0;
    for f in frames {
        let v = value(f);
        if v < min.value {
            min = point(f);
        }
        if v > max.value {
            max = point(f);
        }
        sum += v;
    }
    TrajectoryStat {
        initial: point(first),
        last: point(last),
        min,
        max,
        mean: sum / frames.len() as f64,
        is_static: (max.value - min.value) <= tol,
    }
}

fn build_instance(
    clip_id: &str,
    run: &[FrameAnnotation],
    instance_idx: u32,
    tol: &Tolerances,
) -> EventInstance {
    let azimuth = dimension_stat(run, |f| f.azimuth_deg as f64, tol.azimuth_deg);
    let elevation = dimension_stat(run, |f| f.elevation_deg as f64, tol.elevation_deg);
    let distance = dimension_stat(run, |f| f.distance_cm as f64, tol.distance_cm);
    let is_moving = !(azimuth.is_static && elevation.is_static && distance.is_static);
    EventInstance {
        clip_id: clip_id.to_string(),
        class_idx: run[0].class_idx,
        source_id: run[0].source_id,
        instance_idx,
        onset_s: frame_to_seconds(run[0].frame),
        offset_s: frame_to_seconds(run[run.len() - 1].frame),
        azimuth,
        elevation,
        distance,
        is_moving,
    }
}

/// Extract all event instances of a clip.
///
/// Output is sorted by (source, class, onset); `instance_idx` numbers the
/// runs of each (class, source) pair from 0 in onset order.
pub fn extract_instances(clip: &Clip, tol: &Tolerances) -> Vec<EventInstance> {
    let mut by_pair: Vec<((u32, usize), Vec<FrameAnnotation>)> = Vec::new();
    for f in &clip.frames {
        let key = (f.source_id, f.class_idx);
        match by_pair.iter_mut().find(|(k, _)| *k == key) {
            Some((_, frames)) => frames.push(*f),
            None => by_pair.push((key, vec![*f])),
        }
    }
    by_pair.sort_by_key(|(k, _)| *k);

    let mut instances = Vec::new();
    for (_, frames) in &by_pair {
        // Clip order is (frame, class, source), so each pair's frames are
        // already in frame order.
        let mut run_start = 0;
        let mut instance_idx = 0;
        for i in 1..=frames.len() {
            let broken = i == frames.len() || frames[i].frame > frames[i - 1].frame + 1;
            if broken {
                instances.push(build_instance(
                    &clip.clip_id,
                    &frames[run_start..i],
                    instance_idx,
                    tol,
                ));
                instance_idx += 1;
                run_start = i;
            }
        }
    }
    instances
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ClassVocabulary, SceneError};

    fn clip(rows: &[(u32, usize, u32, i32, i32, u32)]) -> Clip {
        let vocab = ClassVocabulary::starss23();
        let frames: Result<Vec<_>, SceneError> = rows
            .iter()
            .map(|&(f, c, s, az, el, d)| FrameAnnotation::new(f, c, s, az, el, d, &vocab))
            .collect();
        Clip::new("c".into(), "r".into(), 0, 100, frames.unwrap()).unwrap()
    }

    #[test]
    fn single_run_basic_stats() {
        let c = clip(&[
            (2, 1, 2, -70, -46, 97),
            (3, 1, 2, -80, -46, 97),
            (4, 1, 2, -95, -46, 97),
        ]);
        let inst = extract_instances(&c, &Tolerances::default());
        assert_eq!(inst.len(), 1);
        let i = &inst[0];
        assert_eq!(i.onset_s, 0.2);
        assert_eq!(i.offset_s, 0.4);
        assert_eq!(i.azimuth.initial.value, -70.0);
        assert_eq!(i.azimuth.last.value, -95.0);
        assert_eq!(i.azimuth.max.value, -70.0);
        assert_eq!(i.azimuth.max.time_s, 0.2);
        assert_eq!(i.azimuth.min.value, -95.0);
        assert_eq!(i.azimuth.min.time_s, 0.4);
        assert!(!i.azimuth.is_static);
        assert!(i.elevation.is_static);
        assert_eq!(i.elevation.mean, -46.0);
        assert!(i.distance.is_static);
        assert!(i.is_moving);
    }

    #[test]
    fn gap_splits_instances() {
        let c = clip(&[
            (0, 0, 1, 0, 0, 50),
            (1, 0, 1, 0, 0, 50),
            (3, 0, 1, 0, 0, 50),
        ]);
        let inst = extract_instances(&c, &Tolerances::default());
        assert_eq!(inst.len(), 2);
        assert_eq!(inst[0].instance_idx, 0);
        assert_eq!(inst[0].offset_s, 0.1);
        assert_eq!(inst[1].instance_idx, 1);
        assert_eq!(inst[1].onset_s, 0.3);
    }

    #[test]
    fn adjacent_frames_stay_one_instance() {
        let c = clip(&[
            (0, 0, 1, 0, 0, 50),
            (1, 0, 1, 0, 0, 50),
            (2, 0, 1, 0, 0, 50),
        ]);
        assert_eq!(extract_instances(&c, &Tolerances::default()).len(), 1);
    }

    #[test]
    fn distinct_sources_and_classes_kept_apart() {
        let c = clip(&[
            (0, 0, 1, 0, 0, 50),
            (0, 0, 2, 0, 0, 50),
            (0, 1, 1, 0, 0, 50),
        ]);
        let inst = extract_instances(&c, &Tolerances::default());
        assert_eq!(inst.len(), 3);
        let keys: Vec<_> = inst.iter().map(|i| (i.source_id, i.class_idx)).collect();
        assert_eq!(keys, vec![(1, 0), (1, 1), (2, 0)]);
    }

    #[test]
    fn movement_within_tolerance_is_static() {
        let c = clip(&[(0, 0, 1, 0, 0, 50), (1, 0, 1, 5, 3, 58)]);
        let inst = extract_instances(&c, &Tolerances::default());
        assert!(!inst[0].is_moving);
        assert!(inst[0].azimuth.is_static);

        let c = clip(&[(0, 0, 1, 0, 0, 50), (1, 0, 1, 6, 0, 50)]);
        let inst = extract_instances(&c, &Tolerances::default());
        assert!(inst[0].is_moving);
        assert!(!inst[0].azimuth.is_static);
    }

    #[test]
    fn min_max_take_first_occurrence_time() {
        let c = clip(&[
            (0, 0, 1, 10, 0, 50),
            (1, 0, 1, 20, 0, 50),
            (2, 0, 1, 10, 0, 50),
            (3, 0, 1, 20, 0, 50),
        ]);
        let inst = extract_instances(&c, &Tolerances::default());
        assert_eq!(inst[0].azimuth.min.time_s, 0.0);
        assert_eq!(inst[0].azimuth.max.time_s, 0.1);
        assert_eq!(inst[0].azimuth.mean, 15.0);
    }

    #[test]
    fn tolerance_is_inclusive() {
        let c = clip(&[(0, 0, 1, 0, 0, 50), (1, 0, 1, 0, 0, 60)]);
        let inst = extract_instances(&c, &Tolerances::default());
        assert!(inst[0].distance.is_static);
    }
}
