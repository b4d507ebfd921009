//! Scoring prediction files against ground truth: micro-averaged detection
//! precision/recall/F1 plus a rank-displacement MRR for ordering questions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qa::{AnswerRecord, QaRecord, QuestionType, YesNoValue};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("ground-truth ordering is empty")]
    EmptyGroundTruth,
    #[error("duplicate class at position {0} of the ground-truth ordering")]
    DuplicateInGroundTruth(usize),
    #[error("duplicate class at position {0} of the predicted ordering")]
    DuplicateInPrediction(usize),
    #[error("answer kind mismatch: ground truth {gt}, prediction {pred}")]
    KindMismatch {
        gt: &'static str,
        pred: &'static str,
    },
}

fn kind_name(a: &AnswerRecord) -> &'static str {
    match a {
        AnswerRecord::YesNo(_) => "yes_no",
        AnswerRecord::ClassSet(_) => "class_set",
        AnswerRecord::ClassRanking(_) => "class_ranking",
    }
}

fn check_distinct<T: Eq + Hash>(
    items: &[T],
    err: fn(usize) -> ScoringError,
) -> Result<(), ScoringError> {
    let mut seen = HashSet::new();
    for (i, item) in items.iter().enumerate() {
        if !seen.insert(item) {
            return Err(err(i));
        }
    }
    Ok(())
}

/// Rank-displacement MRR over orderings.
///
/// With 1-based ranks `r_c` in the ground truth `gt` and `r̂_c` in the
/// prediction, each ground-truth class scores `1/(1+|r̂_c−r_c|)` when
/// predicted and 0 when absent; the result is the mean over `gt`. Classes
/// predicted but not in `gt` contribute nothing here (they are penalized by
/// the detection metrics).
pub fn mrr_mod<T: Eq + Hash>(gt: &[T], pred: &[T]) -> Result<f64, ScoringError> {
    if gt.is_empty() {
        return Err(ScoringError::EmptyGroundTruth);
    }
    check_distinct(gt, ScoringError::DuplicateInGroundTruth)?;
    check_distinct(pred, ScoringError::DuplicateInPrediction)?;
    let pred_rank: HashMap<&T, usize> = pred.iter().enumerate().map(|(i, c)| (c, i + 1)).collect();
    let total: f64 = gt
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = i + 1;
            match pred_rank.get(c) {
                Some(&r_hat) => 1.0 / (1.0 + r.abs_diff(r_hat) as f64),
                None => 0.0,
            }
        })
        .sum();
    Ok(total / gt.len() as f64)
}

/// Detection counts for one question.
///
/// Yes/no questions concern a single queried class: GT yes + pred yes is a
/// true positive, pred yes on GT no a false positive, a missed yes a false
/// negative. List answers are compared as class sets.
pub fn score_detection(
    gt: &AnswerRecord,
    pred: &AnswerRecord,
) -> Result<(u64, u64, u64), ScoringError> {
    let as_set = |a: &AnswerRecord| -> Option<HashSet<String>> {
        match a {
            AnswerRecord::ClassSet(v) | AnswerRecord::ClassRanking(v) => {
                Some(v.iter().cloned().collect())
            }
            AnswerRecord::YesNo(_) => None,
        }
    };
    match (gt, pred) {
        (AnswerRecord::YesNo(g), AnswerRecord::YesNo(p)) => Ok(match (g, p) {
            (YesNoValue::Yes, YesNoValue::Yes) => (1, 0, 0),
            (YesNoValue::No, YesNoValue::Yes) => (0, 1, 0),
            (YesNoValue::Yes, YesNoValue::No) => (0, 0, 1),
            (YesNoValue::No, YesNoValue::No) => (0, 0, 0),
        }),
        (g, p) => match (as_set(g), as_set(p)) {
            (Some(gt_set), Some(pred_set)) => {
                let tp = gt_set.intersection(&pred_set).count() as u64;
                let fp = pred_set.difference(&gt_set).count() as u64;
                let fn_ = gt_set.difference(&pred_set).count() as u64;
                Ok((tp, fp, fn_))
            }
            _ => Err(ScoringError::KindMismatch {
                gt: kind_name(gt),
                pred: kind_name(pred),
            }),
        },
    }
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub question_id: String,
    pub answer: AnswerRecord,
}

/// Detection metrics for a slice of questions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricBlock {
    pub questions: u64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricBlock {
    fn finalize(&mut self) {
        self.precision = ratio(self.tp, self.tp + self.fp);
        self.recall = ratio(self.tp, self.tp + self.fn_);
        self.f1 = if self.precision + self.recall > 0.0 {
            2.0 * self.precision * self.recall / (self.precision + self.recall)
        } else {
            0.0
        };
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Full scoring result: overall and per-type detection metrics, ordering
/// MRRs split into spatial (Type III extremes + Type IV) and temporal
/// (Type V), per-subtype MRR breakdowns, and non-fatal issues.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreReport {
    pub overall: MetricBlock,
    pub per_type: BTreeMap<String, MetricBlock>,
    pub spatial_mrr_mod: f64,
    pub spatial_mrr_questions: u64,
    pub temporal_mrr_mod: f64,
    pub temporal_mrr_questions: u64,
    pub mrr_by_subtype: BTreeMap<String, f64>,
    pub macro_averaged: bool,
    pub issues: Vec<String>,
}

/// Score predictions against ground truth.
///
/// Missing predictions count as empty answers (a "no" for yes/no
/// questions). Duplicate predictions keep the last occurrence. Predictions
/// for unknown question ids, kind mismatches, and malformed orderings are
/// reported as issues; mismatched items are excluded from the aggregates.
/// `macro_averaged` switches the overall P/R/F1 from a micro average over
/// all questions to an unweighted mean over question types.
pub fn score_dataset(
    gt: &[QaRecord],
    preds: &[PredictionRecord],
    macro_averaged: bool,
) -> ScoreReport {
    let mut issues = Vec::new();

    let mut gt_by_id: HashMap<&str, &QaRecord> = HashMap::new();
    for record in gt {
        if gt_by_id
            .insert(record.question_id.as_str(), record)
            .is_some()
        {
            issues.push(format!(
                "duplicate ground-truth question_id {:?}; keeping the last",
                record.question_id
            ));
        }
    }

    let mut pred_by_id: HashMap<&str, &AnswerRecord> = HashMap::new();
    for p in preds {
        if !gt_by_id.contains_key(p.question_id.as_str()) {
            issues.push(format!(
                "prediction for unknown question_id {:?} ignored",
                p.question_id
            ));
            continue;
        }
        if pred_by_id
            .insert(p.question_id.as_str(), &p.answer)
            .is_some()
        {
            issues.push(format!(
                "duplicate prediction for {:?}; keeping the last",
                p.question_id
            ));
        }
    }

    let mut overall = MetricBlock::default();
    let mut per_type: BTreeMap<String, MetricBlock> = BTreeMap::new();
    let mut spatial = Vec::new();
    let mut temporal = Vec::new();
    let mut by_subtype: BTreeMap<String, Vec<f64>> = BTreeMap::new();

    let mut seen_ids: HashSet<&str> = HashSet::new();
    for record in gt {
        if !seen_ids.insert(record.question_id.as_str()) {
            continue;
        }
        let record = gt_by_id[record.question_id.as_str()];
        let empty = match record.answer {
            AnswerRecord::YesNo(_) => AnswerRecord::YesNo(YesNoValue::No),
            _ => AnswerRecord::ClassSet(Vec::new()),
        };
        let pred = pred_by_id
            .get(record.question_id.as_str())
            .copied()
            .unwrap_or(&empty);

        let (tp, fp, fn_) = match score_detection(&record.answer, pred) {
            Ok(counts) => counts,
            Err(e) => {
                issues.push(format!("{}: {e}; excluded", record.question_id));
                continue;
            }
        };
        let block = per_type.entry(record.qtype.to_string()).or_default();
        for b in [&mut overall, block] {
            b.questions += 1;
            b.tp += tp;
            b.fp += fp;
            b.fn_ += fn_;
        }

        if let AnswerRecord::ClassRanking(gt_order) = &record.answer {
            let pred_order: &[String] = match pred {
                AnswerRecord::ClassSet(v) | AnswerRecord::ClassRanking(v) => v,
                AnswerRecord::YesNo(_) => unreachable!("kind mismatch handled above"),
            };
            let value = match mrr_mod(gt_order, pred_order) {
                Ok(v) => v,
                Err(e @ ScoringError::DuplicateInPrediction(_)) => {
                    issues.push(format!("{}: {e}; scored 0", record.question_id));
                    0.0
                }
                Err(e) => {
                    issues.push(format!("{}: {e}; excluded from MRR", record.question_id));
                    continue;
                }
            };
            match record.qtype {
                QuestionType::III | QuestionType::IV => spatial.push(value),
                QuestionType::V => temporal.push(value),
                _ => {}
            }
            by_subtype
                .entry(format!("{}:{}", record.qtype, record.subtype))
                .or_default()
                .push(value);
        }
    }

    overall.finalize();
    for block in per_type.values_mut() {
        block.finalize();
    }
    if macro_averaged {
        let blocks: Vec<&MetricBlock> = per_type.values().collect();
        overall.precision = mean(&blocks.iter().map(|b| b.precision).collect::<Vec<_>>());
        overall.recall = mean(&blocks.iter().map(|b| b.recall).collect::<Vec<_>>());
        overall.f1 = mean(&blocks.iter().map(|b| b.f1).collect::<Vec<_>>());
    }

    ScoreReport {
        overall,
        per_type,
        spatial_mrr_mod: mean(&spatial),
        spatial_mrr_questions: spatial.len() as u64,
        temporal_mrr_mod: mean(&temporal),
        temporal_mrr_questions: temporal.len() as u64,
        mrr_by_subtype: by_subtype
            .into_iter()
            .map(|(k, v)| (k.clone(), mean(&v)))
            .collect(),
        macro_averaged,
        issues,
    }
}

/// Fixed-width table of the report: per-type rows plus an overall row, with
/// detection columns and the two MRR columns.
pub fn render_report(report: &ScoreReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Questions scored: {} ({} issue{})\n\n",
        report.overall.questions,
        report.issues.len(),
        if report.issues.len() == 1 { "" } else { "s" }
    ));
    out.push_str(&format!(
        "{:<10}{:>11}{:>9}{:>9}{:>18}{:>19}\n",
        "", "Precision", "Recall", "F1", "Spatial MRR_mod", "Temporal MRR_mod"
    ));
    let num = |v: f64| format!("{v:.3}");
    let type_mrr = |t: &str| -> (String, String) {
        let means: Vec<f64> = report
            .mrr_by_subtype
            .iter()
            .filter(|(k, _)| k.starts_with(&format!("{t}:")))
            .map(|(_, v)| *v)
            .collect();
        if means.is_empty() {
            ("-".into(), "-".into())
        } else if t == "V" {
            ("-".into(), num(mean(&means)))
        } else {
            (num(mean(&means)), "-".into())
        }
    };
    for (t, block) in &report.per_type {
        let (s, tmp) = type_mrr(t);
        out.push_str(&format!(
            "{:<10}{:>11}{:>9}{:>9}{:>18}{:>19}\n",
            format!("Type {t}"),
            num(block.precision),
            num(block.recall),
            num(block.f1),
            s,
            tmp
        ));
    }
    out.push_str(&format!(
        "{:<10}{:>11}{:>9}{:>9}{:>18}{:>19}\n",
        "Overall",
        num(report.overall.precision),
        num(report.overall.recall),
        num(report.overall.f1),
        num(report.spatial_mrr_mod),
        num(report.temporal_mrr_mod)
    ));
    if !report.issues.is_empty() {
        out.push_str("\nIssues:\n");
        for issue in &report.issues {
            out.push_str(&format!("  - {issue}\n"));
        }
    }
    out
}
