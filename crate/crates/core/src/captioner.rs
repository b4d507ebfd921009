//! Rule-based textual descriptions of event instances.
//!
//! Each instance is rendered as one paragraph: an opening sentence with the
//! time span and class label, one clause per spatial dimension (trajectory
//! phrasing when the dimension moves, "approximately" phrasing when it holds
//! still), and a closing source id sentence.

use serde::{Deserialize, Serialize};

use crate::instances::{extract_instances, Tolerances};
use crate::scene::{ClassVocabulary, Clip, EventInstance, TrajectoryStat};

/// A rendered caption for one event instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceCaption {
    pub clip_id: String,
    pub source_id: u32,
    pub class: String,
    pub instance_idx: u32,
    pub text_rule: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub text_rephrased: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rephrase_provider: Option<String>,
}

struct DimensionWords {
    /// "an azimuth angle", "an elevation angle", "a distance"
    full: &'static str,
    /// "an azimuth", "an elevation", "a distance"
    short: &'static str,
    /// "azimuth angle", "elevation angle", "distance"
    noun: &'static str,
    /// true: "X degrees"; false: "Xcm"
    spaced_unit: bool,
}

const AZIMUTH_WORDS: DimensionWords = DimensionWords {
    full: "an azimuth angle",
    short: "an azimuth",
    noun: "azimuth angle",
    spaced_unit: true,
};
const ELEVATION_WORDS: DimensionWords = DimensionWords {
    full: "an elevation angle",
    short: "an elevation",
    noun: "elevation angle",
    spaced_unit: true,
};
const DISTANCE_WORDS: DimensionWords = DimensionWords {
    full: "a distance",
    short: "a distance",
    noun: "distance",
    spaced_unit: false,
};

fn fmt_value(v: f64, spaced_unit: bool) -> String {
    let n = v.round() as i64;
    if spaced_unit {
        format!("{n} degrees")
    } else {
        format!("{n}cm")
    }
}

fn fmt_time(t: f64) -> String {
    format!("{t:.1}s")
}

fn dimension_sentences(stat: &TrajectoryStat, words: &DimensionWords, out: &mut String) {
    if stat.is_static {
        out.push_str(&format!(
            " The sound was coming throughout from {} of approximately {}.",
            words.full,
            fmt_value(stat.mean, words.spaced_unit)
        ));
    } else {
        out.push_str(&format!(
            " It is initially at {} of {} and moved finally to {} of {}.",
            words.full,
            fmt_value(stat.initial.value, words.spaced_unit),
            words.short,
            fmt_value(stat.last.value, words.spaced_unit)
        ));
        out.push_str(&format!(
            " During this time, the sound source moved to a maximum {} of {} at {} and to a minimum {} of {} at {}.",
            words.noun,
            fmt_value(stat.max.value, words.spaced_unit),
            fmt_time(stat.max.time_s),
            words.noun,
            fmt_value(stat.min.value, words.spaced_unit),
            fmt_time(stat.min.time_s)
        ));
    }
}

/// Render the rule-based description of one instance.
pub fn render_instance_caption(inst: &EventInstance, vocab: &ClassVocabulary) -> String {
    let label = vocab.label(inst.class_idx).unwrap_or("unknown sound");
    let mut text = format!(
        "From {} to {}, {} is heard.",
        fmt_time(inst.onset_s),
        fmt_time(inst.offset_s),
        label
    );
    dimension_sentences(&inst.azimuth, &AZIMUTH_WORDS, &mut text);
    dimension_sentences(&inst.elevation, &ELEVATION_WORDS, &mut text);
    dimension_sentences(&inst.distance, &DISTANCE_WORDS, &mut text);
    text.push_str(&format!(" Source id: {}.", inst.source_id));
    text
}

/// Extract a clip's instances and render one caption per instance, in
/// (source_id, class_idx, onset) order.
pub fn render_clip_captions(
    clip: &Clip,
    tol: &Tolerances,
    vocab: &ClassVocabulary,
) -> Vec<InstanceCaption> {
    extract_instances(clip, tol)
        .iter()
        .map(|inst| InstanceCaption {
            clip_id: clip.clip_id.clone(),
            source_id: inst.source_id,
            class: vocab
                .label(inst.class_idx)
                .unwrap_or("unknown sound")
                .to_string(),
            instance_idx: inst.instance_idx,
            text_rule: render_instance_caption(inst, vocab),
            text_rephrased: None,
            rephrase_provider: None,
        })
        .collect()
}
