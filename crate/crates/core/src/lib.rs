//! Dataset-forge and evaluation toolkit for spatial audio question answering.
//!
//! The pipeline turns frame-level sound-event annotations (class, source,
//! azimuth, elevation, distance at 100 ms resolution) into trajectory
//! captions and five types of QA pairs with rule-derived answers, scores
//! prediction files with detection and rank-displacement metrics, and ships
//! a numerical reference of the composite training loss used for ordering
//! heads.
//!
//! Modules follow the data flow:
//!
//! * [`scene`] — core domain types and the class vocabulary
//! * [`ingest`] — annotation CSV parsing and 10-second clip segmentation
//! * [`instances`] — contiguous instance extraction and trajectory summaries
//! * [`captioner`] — rule-based caption rendering
//! * [`rephrase`] — offline and HTTP paraphrase clients with numeral validation
//! * [`qa`] — question generation with rule-derived ground truth
//! * [`scoring`] — precision/recall/F1 and modified mean reciprocal rank
//! * [`loss`] — BCE + margin ranking + L1 loss reference with gradient checks
//! * [`synth`] — seeded synthetic scenes and an independent brute-force oracle
//! * [`pipeline`] — directory-level commands shared by the CLI

pub mod captioner;
pub mod ingest;
pub mod instances;
pub mod loss;
pub mod pipeline;
pub mod qa;
pub mod rephrase;
pub mod scene;
pub mod scoring;
pub mod synth;

mod variant_bank;

pub use scene::{ClassVocabulary, Clip, EventInstance, FrameAnnotation, TrajectoryStat};

/// FNV-1a on bytes: a tiny stable hash for deriving per-item RNG seeds.
/// The std hasher is not guaranteed stable across releases, and seeds must
/// never drift.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
