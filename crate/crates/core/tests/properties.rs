//! Cross-question invariants of the generated answers, checked over seeded
//! random clips.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seldqa_core::instances::Tolerances;
use seldqa_core::qa::{
    first_appearances, generate_clip_items, Answer, AzimuthConvention, QaItem, QuestionType,
};
use seldqa_core::synth::random_clip;
use seldqa_core::{ClassVocabulary, Clip};

fn items_for(seed: u64) -> (Clip, Vec<QaItem>) {
    let vocab = ClassVocabulary::starss23();
    let clip = random_clip(seed, format!("prop{seed:016x}"), &vocab);
    let items = generate_clip_items(
        &clip,
        &vocab,
        &Tolerances::default(),
        AzimuthConvention::LeftPositive,
        0,
    );
    (clip, items)
}

fn answer<'a>(items: &'a [QaItem], qtype: QuestionType, subtype: &str) -> Option<&'a Answer> {
    items
        .iter()
        .find(|i| i.qtype == qtype && i.subtype == subtype)
        .map(|i| &i.answer)
}

fn classes(answer: &Answer) -> &[usize] {
    match answer {
        Answer::ClassSet(v) | Answer::ClassRanking(v) => v,
        Answer::YesNo(_) => panic!("expected a class answer"),
    }
}

fn is_subsequence(part: &[usize], whole: &[usize]) -> bool {
    let mut it = whole.iter();
    part.iter().all(|p| it.any(|w| w == p))
}

proptest! {
    #[test]
    fn active_listing_is_stationary_and_moving_merged(seed in any::<u64>()) {
        let (_, items) = items_for(seed);
        let active = classes(answer(&items, QuestionType::II, "active").unwrap());
        let stationary = classes(answer(&items, QuestionType::III, "stationary").unwrap());
        let moving = classes(answer(&items, QuestionType::III, "moving").unwrap());

        let mut union: Vec<usize> = stationary.iter().chain(moving).copied().collect();
        union.sort_unstable();
        let mut sorted_active = active.to_vec();
        sorted_active.sort_unstable();
        prop_assert_eq!(union, sorted_active);
        prop_assert!(is_subsequence(stationary, active));
        prop_assert!(is_subsequence(moving, active));
    }

    #[test]
    fn extremes_head_their_rankings(seed in any::<u64>()) {
        let (_, items) = items_for(seed);
        let Some(active) = answer(&items, QuestionType::II, "active").map(classes) else {
            return Ok(());
        };
        if active.len() < 2 {
            // single-class clips have extremes but no rankings
            if active.len() == 1 {
                for subtype in ["leftmost", "rightmost", "topmost", "bottommost", "nearest", "farthest"] {
                    let extreme = classes(answer(&items, QuestionType::III, subtype).unwrap());
                    prop_assert_eq!(extreme, active);
                }
            }
            return Ok(());
        }
        for (extreme, ranking) in [
            ("leftmost", "azimuth_desc"),
            ("rightmost", "azimuth_asc"),
            ("topmost", "elevation_desc"),
            ("bottommost", "elevation_asc"),
            ("nearest", "distance_asc"),
            ("farthest", "distance_desc"),
        ] {
            let head = classes(answer(&items, QuestionType::III, extreme).unwrap())[0];
            let order = classes(answer(&items, QuestionType::IV, ranking).unwrap());
            prop_assert_eq!(head, order[0], "{} vs head of {}", extreme, ranking);
        }
    }

    #[test]
    fn class_answers_list_active_classes_without_duplicates(seed in any::<u64>()) {
        let (clip, items) = items_for(seed);
        let active: BTreeSet<usize> = clip.frames.iter().map(|f| f.class_idx).collect();
        for item in &items {
            if let Answer::ClassSet(v) | Answer::ClassRanking(v) = &item.answer {
                let unique: BTreeSet<usize> = v.iter().copied().collect();
                prop_assert_eq!(unique.len(), v.len(), "duplicates in {}", item.question_id);
                prop_assert!(
                    unique.is_subset(&active),
                    "inactive class in {}",
                    item.question_id
                );
            }
        }
        // rankings and the appearance order cover every active class
        for item in &items {
            if let Answer::ClassRanking(v) = &item.answer {
                if item.qtype != QuestionType::III {
                    prop_assert_eq!(v.len(), active.len(), "{}", item.question_id);
                }
            }
        }
    }

    #[test]
    fn rankings_reverse_when_values_are_distinct(seed in any::<u64>()) {
        let (clip, items) = items_for(seed);
        let fas = first_appearances(&clip, &Tolerances::default());
        if fas.len() < 2 {
            return Ok(());
        }
        let dims: [(&str, &str, Vec<i64>); 3] = [
            ("azimuth_asc", "azimuth_desc", fas.iter().map(|f| f.azimuth_deg as i64).collect()),
            ("elevation_asc", "elevation_desc", fas.iter().map(|f| f.elevation_deg as i64).collect()),
            ("distance_asc", "distance_desc", fas.iter().map(|f| f.distance_cm as i64).collect()),
        ];
        for (asc, desc, values) in dims {
            let unique: BTreeSet<i64> = values.iter().copied().collect();
            if unique.len() != values.len() {
                continue;
            }
            let forward = classes(answer(&items, QuestionType::IV, asc).unwrap());
            let mut backward = classes(answer(&items, QuestionType::IV, desc).unwrap()).to_vec();
            backward.reverse();
            prop_assert_eq!(forward, &backward[..], "{} is not {} reversed", asc, desc);
        }
    }

    #[test]
    fn answers_ignore_frame_order(seed in any::<u64>()) {
        let (clip, items) = items_for(seed);
        let mut shuffled = clip.frames.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xdead_beef));
        let reordered = Clip::new(
            clip.clip_id.clone(),
            clip.recording_id.clone(),
            clip.start_frame,
            clip.length_frames,
            shuffled,
        )
        .unwrap();
        let again = generate_clip_items(
            &reordered,
            &ClassVocabulary::starss23(),
            &Tolerances::default(),
            AzimuthConvention::LeftPositive,
            0,
        );
        prop_assert_eq!(items, again);
    }
}
