//! Agreement statistics, gold construction, the F1 family and code
//! co-occurrence.
//!
//! All probabilities are formed from integer tallies and converted to `f64`
//! only in the last division. Undefined values are `None`, never zero.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{check_pair, AnnotationMatrix, Violation};

mod agreement;
mod cooccurrence;
mod evaluation;
mod f1;
mod gold;

pub use agreement::{cohen_kappa, pabak, pabak_from_po, percent_agreement, AgreementSummary, CodeAgreement, PerCode};
pub use cooccurrence::{jaccard_matrix, jaccard_pair, pearson_matrix, pearson_pair, CooccurrenceKind, CooccurrenceMatrix};
pub use evaluation::{evaluate, CodeMetrics, EvaluationItem, EvaluationReport};
pub use f1::{f1_scores, CodeF1, F1Summary};
pub use gold::{majority_gold, minimum_match_gold, GoldPolicy, MetricsWarning};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("matrices are not aligned: {0:?}")]
    Alignment(Vec<Violation>),
    #[error("no annotators given")]
    NoAnnotators,
    #[error("majority gold needs at least two annotators, got {0}")]
    TooFewAnnotators(usize),
    #[error("no matrices given")]
    EmptyInput,
    #[error("matrix has no sentences")]
    EmptyMatrix,
}

/// Cell tallies for one code (or for all flattened cells), treating the first
/// matrix as the prediction and the second as the reference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn from_cells<'a>(pairs: impl IntoIterator<Item = (&'a u8, &'a u8)>) -> Self {
        let mut c = ConfusionCounts::default();
        for (&a, &b) in pairs {
            c.add(a, b);
        }
        c
    }

    pub fn add(&mut self, pred: u8, reference: u8) {
        match (pred, reference) {
            (1, 1) => self.tp += 1,
            (1, _) => self.fp += 1,
            (_, 1) => self.fn_ += 1,
            _ => self.tn += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn agreements(&self) -> u64 {
        self.tp + self.tn
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Per-code tallies plus the flattened (all cells) tally, pooled over pairs.
pub(crate) struct Tallies {
    pub per_code: Vec<ConfusionCounts>,
    pub global: ConfusionCounts,
}

pub(crate) fn tally_pairs<'a>(
    pairs: impl IntoIterator<Item = (&'a AnnotationMatrix, &'a AnnotationMatrix)>,
) -> Result<Tallies, MetricsError> {
    let mut per_code: Option<Vec<ConfusionCounts>> = None;
    let mut first_codes: Option<&[alloc::string::String]> = None;
    for (a, b) in pairs {
        check_pair(a, b).map_err(MetricsError::Alignment)?;
        if a.num_sentences() == 0 {
            return Err(MetricsError::EmptyMatrix);
        }
        if let Some(codes) = first_codes {
            if codes != a.codes() {
                return Err(MetricsError::Alignment(alloc::vec![Violation::DimensionMismatch {
                    axis: crate::annotation::Axis::Columns,
                    expected: codes.len(),
                    found: a.num_codes(),
                }]));
            }
        }
        first_codes = Some(a.codes());
        let counts = per_code.get_or_insert_with(|| alloc::vec![ConfusionCounts::default(); a.num_codes()]);
        for r in 0..a.num_sentences() {
            for (c, slot) in counts.iter_mut().enumerate() {
                slot.add(a.get(r, c), b.get(r, c));
            }
        }
    }
    let per_code = per_code.ok_or(MetricsError::EmptyInput)?;
    let mut global = ConfusionCounts::default();
    for c in &per_code {
        global.merge(c);
    }
    Ok(Tallies { per_code, global })
}
