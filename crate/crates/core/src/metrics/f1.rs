use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ratio, tally_pairs, ConfusionCounts, MetricsError};
use crate::annotation::AnnotationMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeF1 {
    pub code: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// F1 with 1 as the positive class.
    pub f1_positive: Option<f64>,
    /// Support-weighted mean of the positive-class and negative-class F1.
    pub f1_weighted: Option<f64>,
    /// Reference positives (`tp + fn`).
    pub support: u64,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Summary {
    pub per_code: Vec<CodeF1>,
    pub micro_precision: Option<f64>,
    pub micro_recall: Option<f64>,
    pub micro_f1: Option<f64>,
    /// Unweighted mean of the defined per-code `f1_positive` values.
    pub macro_f1: Option<f64>,
    /// Codes left out of `macro_f1` because their F1 is undefined.
    pub macro_excluded: usize,
    /// Unweighted mean of the defined per-code `f1_weighted` values.
    pub mean_weighted_f1: Option<f64>,
    pub counts: ConfusionCounts,
}

/// `2tp / (2tp + fp + fn)`, the harmonic mean of precision and recall,
/// defined whenever either side has a positive.
pub(crate) fn f1_positive(c: &ConfusionCounts) -> Option<f64> {
    ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_)
}

fn f1_weighted(c: &ConfusionCounts) -> Option<f64> {
    let n = c.total() as u128;
    if n == 0 {
        return None;
    }
    // Positive class F1 = 2tp/(2tp+fp+fn) with support tp+fn; negative class
    // F1 = 2tn/(2tn+fn+fp) with support tn+fp. Sum as one fraction.
    let (tp, fp, fn_, tn) = (c.tp as u128, c.fp as u128, c.fn_ as u128, c.tn as u128);
    let pos_den = 2 * tp + fp + fn_;
    let neg_den = 2 * tn + fp + fn_;
    let (num, den) = match (pos_den, neg_den) {
        (0, _) => (2 * tn * (tn + fp), neg_den),
        (_, 0) => (2 * tp * (tp + fn_), pos_den),
        _ => ((tp + fn_) * 2 * tp * neg_den + (tn + fp) * 2 * tn * pos_den, pos_den * neg_den),
    };
    Some(num as f64 / (den * n) as f64)
}

pub(crate) fn code_f1(code: &str, c: &ConfusionCounts) -> CodeF1 {
    CodeF1 {
        code: code.into(),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
        f1_positive: f1_positive(c),
        f1_weighted: f1_weighted(c),
        support: c.tp + c.fn_,
        counts: *c,
    }
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let (mut sum, mut n, mut missing) = (0.0, 0usize, 0usize);
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                n += 1;
            }
            None => missing += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), missing)
}

pub(crate) fn summarize(codes: &[String], per_code: &[ConfusionCounts], global: &ConfusionCounts) -> F1Summary {
    let per_code: Vec<CodeF1> = codes.iter().zip(per_code).map(|(code, c)| code_f1(code, c)).collect();
    let (macro_f1, macro_excluded) = mean_defined(per_code.iter().map(|c| c.f1_positive));
    let (mean_weighted_f1, _) = mean_defined(per_code.iter().map(|c| c.f1_weighted));
    F1Summary {
        micro_precision: ratio(global.tp, global.tp + global.fp),
        micro_recall: ratio(global.tp, global.tp + global.fn_),
        micro_f1: f1_positive(global),
        macro_f1,
        macro_excluded,
        mean_weighted_f1,
        counts: *global,
        per_code,
    }
}

/// Precision, recall and F1 of `pred` against `gold`, per code and pooled.
pub fn f1_scores(pred: &AnnotationMatrix, gold: &AnnotationMatrix) -> Result<F1Summary, MetricsError> {
    let t = tally_pairs([(pred, gold)])?;
    Ok(summarize(pred.codes(), &t.per_code, &t.global))
}
