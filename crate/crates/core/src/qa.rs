//! Question generation: five question types with rule-derived answers.
//!
//! Answers follow the first-appearance rule: per class, only the earliest
//! instance in the clip counts, represented by its initial time and
//! position. Listing answers are ordered by first appearance; every
//! tie-break is ascending class index.

use std::cmp::Reverse;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fnv1a64;
use crate::instances::{extract_instances, Tolerances};
use crate::rephrase::{RemoteRephrase, RephraseError};
use crate::scene::{ClassVocabulary, Clip};
use crate::variant_bank;

/// Linguistic variations generated per question.
pub const VARIANTS_PER_QUESTION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QuestionType {
    I,
    II,
    III,
    IV,
    V,
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QuestionType::I => "I",
            QuestionType::II => "II",
            QuestionType::III => "III",
            QuestionType::IV => "IV",
            QuestionType::V => "V",
        };
        f.write_str(s)
    }
}

impl FromStr for QuestionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(QuestionType::I),
            "II" => Ok(QuestionType::II),
            "III" => Ok(QuestionType::III),
            "IV" => Ok(QuestionType::IV),
            "V" => Ok(QuestionType::V),
            other => Err(format!("unknown question type {other:?}")),
        }
    }
}

/// Which azimuth sign means "left". The positive-left reading is the
/// first-order-ambisonics convention; the switch only affects the
/// leftmost/rightmost questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AzimuthConvention {
    #[default]
    LeftPositive,
    RightPositive,
}

impl FromStr for AzimuthConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left-positive" => Ok(AzimuthConvention::LeftPositive),
            "right-positive" => Ok(AzimuthConvention::RightPositive),
            other => Err(format!(
                "unknown azimuth convention {other:?}, expected left-positive or right-positive"
            )),
        }
    }
}

/// Ground-truth answer, over class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    YesNo(bool),
    /// Active-class listing, ordered by first appearance.
    ClassSet(Vec<usize>),
    /// Ranking where position carries meaning.
    ClassRanking(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YesNoValue {
    Yes,
    No,
}

/// Serialized answer, over display labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum AnswerRecord {
    YesNo(YesNoValue),
    ClassSet(Vec<String>),
    ClassRanking(Vec<String>),
}

impl Answer {
    pub fn to_record(&self, vocab: &ClassVocabulary) -> AnswerRecord {
        let labels = |ids: &[usize]| {
            ids.iter()
                .map(|&c| vocab.label(c).unwrap_or("unknown sound").to_string())
                .collect()
        };
        match self {
            Answer::YesNo(true) => AnswerRecord::YesNo(YesNoValue::Yes),
            Answer::YesNo(false) => AnswerRecord::YesNo(YesNoValue::No),
            Answer::ClassSet(ids) => AnswerRecord::ClassSet(labels(ids)),
            Answer::ClassRanking(ids) => AnswerRecord::ClassRanking(labels(ids)),
        }
    }
}

/// One generated question with its answer and variants.
#[derive(Debug, Clone, PartialEq)]
pub struct QaItem {
    pub question_id: String,
    pub clip_id: String,
    pub qtype: QuestionType,
    pub subtype: String,
    pub question_text: String,
    pub variants: Vec<String>,
    pub answer: Answer,
}

/// The line format of the QA dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub question_id: String,
    pub clip_id: String,
    #[serde(rename = "type")]
    pub qtype: QuestionType,
    pub subtype: String,
    pub question_text: String,
    #[serde(default)]
    pub variants: Vec<String>,
    pub answer: AnswerRecord,
}

impl QaItem {
    pub fn to_record(&self, vocab: &ClassVocabulary) -> QaRecord {
        QaRecord {
            question_id: self.question_id.clone(),
            clip_id: self.clip_id.clone(),
            qtype: self.qtype,
            subtype: self.subtype.clone(),
            question_text: self.question_text.clone(),
            variants: self.variants.clone(),
            answer: self.answer.to_record(vocab),
        }
    }
}

/// First appearance of a class in a clip: the earliest instance, represented
/// by its onset and initial position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassFirstAppearance {
    pub class_idx: usize,
    pub onset_s: f64,
    pub azimuth_deg: i32,
    pub elevation_deg: i32,
    pub distance_cm: u32,
    /// Whether the first-appearance instance itself moves.
    pub is_moving: bool,
}

/// One record per active class: the instance with minimal onset (ties:
/// smaller source id, then instance index), reduced to its initial frame.
/// Output is ordered by (onset, class index).
pub fn first_appearances(clip: &Clip, tol: &Tolerances) -> Vec<ClassFirstAppearance> {
    let instances = extract_instances(clip, tol);
    let mut per_class: Vec<&crate::scene::EventInstance> = Vec::new();
    for inst in &instances {
        match per_class.iter_mut().find(|i| i.class_idx == inst.class_idx) {
            Some(best) => {
                let key =
                    |i: &crate::scene::EventInstance| (i.onset_s, i.source_id, i.instance_idx);
                if key(inst) < key(best) {
                    *best = inst;
                }
            }
            None => per_class.push(inst),
        }
    }
    let mut out: Vec<ClassFirstAppearance> = per_class
        .into_iter()
        .map(|inst| ClassFirstAppearance {
            class_idx: inst.class_idx,
            onset_s: inst.onset_s,
            azimuth_deg: inst.azimuth.initial.value as i32,
            elevation_deg: inst.elevation.initial.value as i32,
            distance_cm: inst.distance.initial.value as u32,
            is_moving: inst.is_moving,
        })
        .collect();
    out.sort_by(|a, b| {
        a.onset_s
            .total_cmp(&b.onset_s)
            .then(a.class_idx.cmp(&b.class_idx))
    });
    out
}

/// Draw this question's variants from its subtype's template bank,
/// deterministically in `seed` and `question_id`.
pub fn offline_variants(
    qtype: QuestionType,
    subtype: &str,
    label: Option<&str>,
    question_id: &str,
    seed: u64,
) -> Vec<String> {
    let bank = variant_bank::bank_for(qtype, subtype);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(question_id.as_bytes()));
    let mut order: Vec<usize> = (0..bank.len()).collect();
    order.shuffle(&mut rng);
    order.truncate(VARIANTS_PER_QUESTION);
    order
        .into_iter()
        .map(|i| match label {
            Some(l) => bank[i].replace("{label}", l),
            None => bank[i].to_string(),
        })
        .collect()
}

fn make_item(
    clip_id: &str,
    qtype: QuestionType,
    subtype: &str,
    question_text: String,
    answer: Answer,
    label: Option<&str>,
    seed: u64,
) -> QaItem {
    let question_id = format!("{clip_id}:{qtype}:{subtype}:0");
    let variants = offline_variants(qtype, subtype, label, &question_id, seed);
    QaItem {
        question_id,
        clip_id: clip_id.to_string(),
        qtype,
        subtype: subtype.to_string(),
        question_text,
        variants,
        answer,
    }
}

/// Type I: one yes/no detection question per vocabulary class.
pub fn gen_type1(clip: &Clip, vocab: &ClassVocabulary, seed: u64) -> Vec<QaItem> {
    let active: HashSet<usize> = clip.frames.iter().map(|f| f.class_idx).collect();
    (0..vocab.len())
        .map(|c| {
            let label = vocab.label(c).expect("index in range");
            make_item(
                &clip.clip_id,
                QuestionType::I,
                &vocab.slug(c).expect("index in range"),
                format!("Is there a sound event of a {label} in the scene?"),
                Answer::YesNo(active.contains(&c)),
                Some(label),
                seed,
            )
        })
        .collect()
}

/// Type II: list all active classes, ordered by first appearance.
pub fn gen_type2(clip: &Clip, vocab: &ClassVocabulary, tol: &Tolerances, seed: u64) -> QaItem {
    let _ = vocab;
    let classes = first_appearances(clip, tol)
        .iter()
        .map(|fa| fa.class_idx)
        .collect();
    make_item(
        &clip.clip_id,
        QuestionType::II,
        "active",
        "Which sound sources are active?".to_string(),
        Answer::ClassSet(classes),
        None,
        seed,
    )
}

fn extreme_max(fas: &[ClassFirstAppearance], key: impl Fn(&ClassFirstAppearance) -> i64) -> usize {
    fas.iter()
        .max_by_key(|fa| (key(fa), Reverse(fa.class_idx)))
        .expect("non-empty")
        .class_idx
}

fn extreme_min(fas: &[ClassFirstAppearance], key: impl Fn(&ClassFirstAppearance) -> i64) -> usize {
    fas.iter()
        .min_by_key(|fa| (key(fa), fa.class_idx))
        .expect("non-empty")
        .class_idx
}

/// Type III: stationary and moving listings, plus six single-class extreme
/// questions when the clip has at least one active class.
pub fn gen_type3(
    clip: &Clip,
    vocab: &ClassVocabulary,
    tol: &Tolerances,
    convention: AzimuthConvention,
    seed: u64,
) -> Vec<QaItem> {
    let _ = vocab;
    let fas = first_appearances(clip, tol);
    let stationary: Vec<usize> = fas
        .iter()
        .filter(|f| !f.is_moving)
        .map(|f| f.class_idx)
        .collect();
    let moving: Vec<usize> = fas
        .iter()
        .filter(|f| f.is_moving)
        .map(|f| f.class_idx)
        .collect();

    let mut items = vec![
        make_item(
            &clip.clip_id,
            QuestionType::III,
            "stationary",
            "What sound sources remain stationary in this scene?".to_string(),
            Answer::ClassSet(stationary),
            None,
            seed,
        ),
        make_item(
            &clip.clip_id,
            QuestionType::III,
            "moving",
            "What sound sources are moving in this scene?".to_string(),
            Answer::ClassSet(moving),
            None,
            seed,
        ),
    ];

    if fas.is_empty() {
        return items;
    }

    let az = |fa: &ClassFirstAppearance| fa.azimuth_deg as i64;
    let el = |fa: &ClassFirstAppearance| fa.elevation_deg as i64;
    let dist = |fa: &ClassFirstAppearance| fa.distance_cm as i64;
    let (leftmost, rightmost) = match convention {
        AzimuthConvention::LeftPositive => (extreme_max(&fas, az), extreme_min(&fas, az)),
        AzimuthConvention::RightPositive => (extreme_min(&fas, az), extreme_max(&fas, az)),
    };
    let extremes = [
        (
            "leftmost",
            "Which sound event is the leftmost in the scene?",
            leftmost,
        ),
        (
            "rightmost",
            "Which sound event is the rightmost in the scene?",
            rightmost,
        ),
        (
            "topmost",
            "Which sound event is the topmost in the scene?",
            extreme_max(&fas, el),
        ),
        (
            "bottommost",
            "Which sound event is the bottommost in the scene?",
            extreme_min(&fas, el),
        ),
        (
            "nearest",
            "Which sound event is the nearest to the microphone?",
            extreme_min(&fas, dist),
        ),
        (
            "farthest",
            "Which sound event is the farthest from the microphone?",
            extreme_max(&fas, dist),
        ),
    ];
    for (subtype, text, class_idx) in extremes {
        items.push(make_item(
            &clip.clip_id,
            QuestionType::III,
            subtype,
            text.to_string(),
            Answer::ClassRanking(vec![class_idx]),
            None,
            seed,
        ));
    }
    items
}

/// Type IV: rank active classes by each spatial dimension, both directions.
/// Emitted only for clips with at least two active classes.
pub fn gen_type4(clip: &Clip, vocab: &ClassVocabulary, tol: &Tolerances, seed: u64) -> Vec<QaItem> {
    let _ = vocab;
    let fas = first_appearances(clip, tol);
    if fas.len() < 2 {
        return Vec::new();
    }
    let ranked_asc = |key: fn(&ClassFirstAppearance) -> i64| -> Vec<usize> {
        let mut v = fas.clone();
        v.sort_by_key(|fa| (key(fa), fa.class_idx));
        v.into_iter().map(|fa| fa.class_idx).collect()
    };
    let ranked_desc = |key: fn(&ClassFirstAppearance) -> i64| -> Vec<usize> {
        let mut v = fas.clone();
        v.sort_by_key(|fa| (Reverse(key(fa)), fa.class_idx));
        v.into_iter().map(|fa| fa.class_idx).collect()
    };
    let az = |fa: &ClassFirstAppearance| fa.azimuth_deg as i64;
    let el = |fa: &ClassFirstAppearance| fa.elevation_deg as i64;
    let dist = |fa: &ClassFirstAppearance| fa.distance_cm as i64;

    let questions: [(&str, &str, Vec<usize>); 6] = [
        (
            "azimuth_asc",
            "Sort the audio events by azimuth angle in ascending order.",
            ranked_asc(az),
        ),
        (
            "azimuth_desc",
            "Sort the audio events by azimuth angle in descending order.",
            ranked_desc(az),
        ),
        (
            "elevation_asc",
            "Sort the audio events from the bottommost to the topmost.",
            ranked_asc(el),
        ),
        (
            "elevation_desc",
            "Sort the audio events from the topmost to the bottommost.",
            ranked_desc(el),
        ),
        (
            "distance_asc",
            "Order the audio events by distance, beginning with the closest.",
            ranked_asc(dist),
        ),
        (
            "distance_desc",
            "Order the audio events by distance, beginning with the farthest.",
            ranked_desc(dist),
        ),
    ];
    questions
        .into_iter()
        .map(|(subtype, text, order)| {
            make_item(
                &clip.clip_id,
                QuestionType::IV,
                subtype,
                text.to_string(),
                Answer::ClassRanking(order),
                None,
                seed,
            )
        })
        .collect()
}

/// Type V: rank active classes by onset. Emitted only for clips with at
/// least two active classes.
pub fn gen_type5(
    clip: &Clip,
    vocab: &ClassVocabulary,
    tol: &Tolerances,
    seed: u64,
) -> Option<QaItem> {
    let _ = vocab;
    let fas = first_appearances(clip, tol);
    if fas.len() < 2 {
        return None;
    }
    let order = fas.iter().map(|fa| fa.class_idx).collect();
    Some(make_item(
        &clip.clip_id,
        QuestionType::V,
        "appearance",
        "Arrange the sound sources in order of when they begin, from earliest to latest."
            .to_string(),
        Answer::ClassRanking(order),
        None,
        seed,
    ))
}

/// All QA items of one clip, ordered by (type, subtype).
pub fn generate_clip_items(
    clip: &Clip,
    vocab: &ClassVocabulary,
    tol: &Tolerances,
    convention: AzimuthConvention,
    seed: u64,
) -> Vec<QaItem> {
    let mut items = gen_type1(clip, vocab, seed);
    items.push(gen_type2(clip, vocab, tol, seed));
    items.extend(gen_type3(clip, vocab, tol, convention, seed));
    items.extend(gen_type4(clip, vocab, tol, seed));
    items.extend(gen_type5(clip, vocab, tol, seed));
    items.sort_by(|a, b| (a.qtype, &a.subtype).cmp(&(b.qtype, &b.subtype)));
    items
}

/// Balance Type I questions per clip: keep every "yes" and an equally sized
/// seeded sample of "no" questions. Other types pass through untouched.
pub fn balance_type1(items: Vec<QaItem>, seed: u64) -> Vec<QaItem> {
    let mut drop: HashSet<String> = HashSet::new();
    let mut clip_ids: Vec<&str> = items.iter().map(|i| i.clip_id.as_str()).collect();
    clip_ids.dedup();
    let clip_ids: Vec<String> = {
        let mut unique: Vec<String> = Vec::new();
        for id in clip_ids {
            if !unique.iter().any(|u| u == id) {
                unique.push(id.to_string());
            }
        }
        unique
    };
    for clip_id in clip_ids {
        let yes_count = items
            .iter()
            .filter(|i| {
                i.clip_id == clip_id
                    && i.qtype == QuestionType::I
                    && i.answer == Answer::YesNo(true)
            })
            .count();
        let mut no_ids: Vec<String> = items
            .iter()
            .filter(|i| {
                i.clip_id == clip_id
                    && i.qtype == QuestionType::I
                    && i.answer == Answer::YesNo(false)
            })
            .map(|i| i.question_id.clone())
            .collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(format!("{clip_id}:balance").as_bytes()));
        no_ids.shuffle(&mut rng);
        for id in no_ids.into_iter().skip(yes_count) {
            drop.insert(id);
        }
    }
    items
        .into_iter()
        .filter(|i| !drop.contains(&i.question_id))
        .collect()
}

/// Prompt for one remote question variant.
pub fn variant_prompt(question: &str, k: usize) -> String {
    format!(
        "Rewrite the following question in different words while keeping its exact meaning. Keep every sound event class name exactly the same. This is variation {k} of {VARIANTS_PER_QUESTION}; make it distinct from the other variations.\nQuestion:\n{question}"
    )
}

/// Request 10 variants from a remote backend, validating distinctness and,
/// for Type I, verbatim survival of the class label.
pub fn remote_variants(
    item: &QaItem,
    client: &dyn RemoteRephrase,
) -> Result<Vec<String>, RephraseError> {
    let required = (item.qtype == QuestionType::I).then(|| item.subtype.replace('_', " "));
    let mut out = Vec::with_capacity(VARIANTS_PER_QUESTION);
    for k in 1..=VARIANTS_PER_QUESTION {
        let text = client.complete(&variant_prompt(&item.question_text, k))?;
        if let Some(req) = &required {
            if !text.contains(req.as_str()) {
                return Err(RephraseError::Protocol(format!(
                    "variant dropped class name {req:?}"
                )));
            }
        }
        if out.contains(&text) {
            return Err(RephraseError::Protocol(format!(
                "duplicate variant returned for {}",
                item.question_id
            )));
        }
        out.push(text);
    }
    Ok(out)
}
