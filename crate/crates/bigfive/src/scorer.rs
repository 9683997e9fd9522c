//! Evaluation against gold labels.
//!
//! Each (author, trait) gold cell lands in exactly one bucket: a correct
//! pole prediction is a true positive (both poles count), a wrong pole is a
//! false positive, and an omitted or missing prediction is a false
//! negative. Gold labels must be binary (`y`/`n` only).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::label::{PersonalityLabel, TraitLabel};
use crate::model::Trait;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("gold label set is empty")]
    EmptyGold,
    #[error("gold label for author {author:?} contains 'o'; gold must be binary")]
    OmittedInGold { author: String },
}

/// Counts and derived metrics for one trait.
///
/// Counts are integral for [`score`]; [`majority_baseline`] reports the
/// per-field mean of its two runs, so they may be halves there. A zero
/// denominator yields 0 for precision and recall, and `f1` is 0 when
/// precision + recall is 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TraitMetrics {
    pub true_pos: f64,
    pub false_pos: f64,
    pub false_neg: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl TraitMetrics {
    pub fn from_counts(true_pos: f64, false_pos: f64, false_neg: f64) -> Self {
        let precision = if true_pos + false_pos > 0.0 { true_pos / (true_pos + false_pos) } else { 0.0 };
        let recall = if true_pos + false_neg > 0.0 { true_pos / (true_pos + false_neg) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        TraitMetrics { true_pos, false_pos, false_neg, precision, recall, f1 }
    }
}

/// Unweighted means over the five traits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Averaged {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub per_trait: [TraitMetrics; 5],
    pub averaged: Averaged,
}

impl Report {
    fn from_metrics(per_trait: [TraitMetrics; 5]) -> Self {
        let averaged = Averaged {
            precision: per_trait.iter().map(|m| m.precision).sum::<f64>() / 5.0,
            recall: per_trait.iter().map(|m| m.recall).sum::<f64>() / 5.0,
            f1: per_trait.iter().map(|m| m.f1).sum::<f64>() / 5.0,
        };
        Report { per_trait, averaged }
    }

    /// TSV rendering: one row per trait plus an `avg` row, columns p, r, f.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("trait\tp\tr\tf\n");
        for t in Trait::ALL {
            let m = &self.per_trait[t.index()];
            writeln!(out, "{}\t{:.6}\t{:.6}\t{:.6}", t.short_name(), m.precision, m.recall, m.f1)
                .expect("string write");
        }
        writeln!(
            out,
            "avg\t{:.6}\t{:.6}\t{:.6}",
            self.averaged.precision, self.averaged.recall, self.averaged.f1
        )
        .expect("string write");
        out
    }
}

fn check_gold(
    gold: &BTreeMap<String, PersonalityLabel>,
) -> Result<(), ScoreError> {
    if gold.is_empty() {
        return Err(ScoreError::EmptyGold);
    }
    for (author, label) in gold {
        if label.has_omitted() {
            return Err(ScoreError::OmittedInGold { author: author.clone() });
        }
    }
    Ok(())
}

/// Score predictions against binary gold labels.
///
/// Authors present only in `pred` are ignored; authors missing from `pred`
/// count as false negatives on every trait.
pub fn score(
    pred: &BTreeMap<String, PersonalityLabel>,
    gold: &BTreeMap<String, PersonalityLabel>,
) -> Result<Report, ScoreError> {
    check_gold(gold)?;
    let mut per_trait = [TraitMetrics::default(); 5];
    for t in Trait::ALL {
        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut fn_ = 0.0;
        for (author, gold_label) in gold {
            match pred.get(author).map(|p| p.get(t)) {
                None | Some(TraitLabel::Omitted) => fn_ += 1.0,
                Some(predicted) if predicted == gold_label.get(t) => tp += 1.0,
                Some(_) => fp += 1.0,
            }
        }
        per_trait[t.index()] = TraitMetrics::from_counts(tp, fp, fn_);
    }
    Ok(Report::from_metrics(per_trait))
}

/// The majority baseline: score an all-`y` and an all-`n` prediction over
/// the gold authors, then take the per-field arithmetic mean of the two
/// reports.
pub fn majority_baseline(
    gold: &BTreeMap<String, PersonalityLabel>,
) -> Result<Report, ScoreError> {
    check_gold(gold)?;
    let uniform = |label: TraitLabel| -> BTreeMap<String, PersonalityLabel> {
        gold.keys().map(|a| (a.clone(), PersonalityLabel::uniform(label))).collect()
    };
    let all_y = score(&uniform(TraitLabel::Positive), gold)?;
    let all_n = score(&uniform(TraitLabel::Negative), gold)?;

    let mut per_trait = [TraitMetrics::default(); 5];
    for ((mean, a), b) in per_trait.iter_mut().zip(&all_y.per_trait).zip(&all_n.per_trait) {
        *mean = TraitMetrics {
            true_pos: (a.true_pos + b.true_pos) / 2.0,
            false_pos: (a.false_pos + b.false_pos) / 2.0,
            false_neg: (a.false_neg + b.false_neg) / 2.0,
            precision: (a.precision + b.precision) / 2.0,
            recall: (a.recall + b.recall) / 2.0,
            f1: (a.f1 + b.f1) / 2.0,
        };
    }
    let averaged = Averaged {
        precision: (all_y.averaged.precision + all_n.averaged.precision) / 2.0,
        recall: (all_y.averaged.recall + all_n.averaged.recall) / 2.0,
        f1: (all_y.averaged.f1 + all_n.averaged.f1) / 2.0,
    };
    Ok(Report { per_trait, averaged })
}
