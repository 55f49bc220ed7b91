use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::agreement::{kappa, p_o, pabak_from_po};
use super::f1::summarize;
use super::gold::{majority_gold, minimum_match_gold, GoldPolicy, MetricsWarning};
use super::{tally_pairs, ConfusionCounts, MetricsError};
use crate::annotation::{code_frequencies, AnnotationMatrix, TieBreak};

/// A prediction for one narrative together with that narrative's human
/// annotations.
#[derive(Debug, Clone)]
pub struct EvaluationItem {
    pub pred: AnnotationMatrix,
    pub annotators: Vec<AnnotationMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeMetrics {
    pub code_id: String,
    /// Mean percentage of sentences carrying the code in the gold matrices.
    pub gold_frequency: f64,
    /// Mean percentage of sentences carrying the code in the predictions.
    pub pred_frequency: f64,
    pub p_o: f64,
    pub pabak: f64,
    pub kappa: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1_positive: Option<f64>,
    pub f1_weighted: Option<f64>,
    pub support: u64,
    pub counts: ConfusionCounts,
}

/// Prediction-versus-gold metrics for one gold policy, pooled over all
/// evaluated narratives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub gold_policy: GoldPolicy,
    pub tie_break: TieBreak,
    pub predictions: Vec<String>,
    pub annotators: Vec<String>,
    pub narratives: Vec<String>,
    pub per_code: Vec<CodeMetrics>,
    pub micro_precision: Option<f64>,
    pub micro_recall: Option<f64>,
    pub micro_f1: Option<f64>,
    pub macro_f1: Option<f64>,
    pub macro_excluded: usize,
    pub mean_weighted_f1: Option<f64>,
    pub global_p_o: f64,
    pub global_pabak: f64,
    pub global_kappa: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<MetricsWarning>,
}

fn push_unique(list: &mut Vec<String>, value: &str) {
    if !list.iter().any(|v| v == value) {
        list.push(value.into());
    }
}

/// Builds the gold matrix for each item under `policy` and scores the
/// predictions against it.
pub fn evaluate(items: &[EvaluationItem], policy: GoldPolicy, tie: TieBreak) -> Result<EvaluationReport, MetricsError> {
    if items.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut golds = Vec::with_capacity(items.len());
    let mut warnings = Vec::new();
    for item in items {
        let gold = match policy {
            GoldPolicy::MinimumMatch => minimum_match_gold(&item.pred, &item.annotators)?,
            GoldPolicy::Majority => {
                let (gold, w) = majority_gold(&item.annotators, tie)?;
                warnings.extend(w);
                gold
            }
        };
        golds.push(gold);
    }
    let tallies = tally_pairs(items.iter().zip(&golds).map(|(i, g)| (&i.pred, g)))?;

    let codes = items[0].pred.codes();
    let mut pred_freq = alloc::vec![0.0; codes.len()];
    let mut gold_freq = alloc::vec![0.0; codes.len()];
    for (item, gold) in items.iter().zip(&golds) {
        let p = code_frequencies(&item.pred).map_err(|_| MetricsError::EmptyMatrix)?;
        let g = code_frequencies(gold).map_err(|_| MetricsError::EmptyMatrix)?;
        for c in 0..codes.len() {
            pred_freq[c] += p[c] / items.len() as f64;
            gold_freq[c] += g[c] / items.len() as f64;
        }
    }

    let f1 = summarize(codes, &tallies.per_code, &tallies.global);
    let per_code = f1
        .per_code
        .iter()
        .enumerate()
        .map(|(c, s)| {
            let counts = &tallies.per_code[c];
            let po = p_o(counts);
            CodeMetrics {
                code_id: s.code.clone(),
                gold_frequency: gold_freq[c],
                pred_frequency: pred_freq[c],
                p_o: po,
                pabak: pabak_from_po(po),
                kappa: kappa(counts),
                precision: s.precision,
                recall: s.recall,
                f1_positive: s.f1_positive,
                f1_weighted: s.f1_weighted,
                support: s.support,
                counts: *counts,
            }
        })
        .collect();

    let mut predictions = Vec::new();
    let mut annotators = Vec::new();
    let mut narratives = Vec::new();
    for item in items {
        push_unique(&mut predictions, &item.pred.annotator().label);
        push_unique(&mut narratives, item.pred.narrative_id());
        for a in &item.annotators {
            push_unique(&mut annotators, &a.annotator().label);
        }
    }

    let global_p_o = p_o(&tallies.global);
    Ok(EvaluationReport {
        gold_policy: policy,
        tie_break: tie,
        predictions,
        annotators,
        narratives,
        per_code,
        micro_precision: f1.micro_precision,
        micro_recall: f1.micro_recall,
        micro_f1: f1.micro_f1,
        macro_f1: f1.macro_f1,
        macro_excluded: f1.macro_excluded,
        mean_weighted_f1: f1.mean_weighted_f1,
        global_p_o,
        global_pabak: pabak_from_po(global_p_o),
        global_kappa: kappa(&tallies.global),
        warnings,
    })
}
