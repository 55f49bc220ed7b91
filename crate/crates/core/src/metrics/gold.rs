use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::annotation::{check_pair, majority_cell, AnnotationMatrix, AnnotatorId, TieBreak};

/// How a single reference matrix is built from several human annotators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldPolicy {
    /// A prediction is correct on a cell if it matches at least one annotator.
    MinimumMatch,
    /// Cell-wise majority of the annotators.
    Majority,
}

impl GoldPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            GoldPolicy::MinimumMatch => "minimum_match",
            GoldPolicy::Majority => "majority",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricsWarning {
    /// Cells where an even number of annotators split evenly and the tie-break
    /// value was used.
    TieBreakApplied { narrative_id: String, annotators: usize, cells: usize, value: u8 },
}

impl core::fmt::Display for MetricsWarning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::TieBreakApplied { narrative_id, annotators, cells, value } => write!(
                f,
                "{narrative_id}: {cells} tied cells across {annotators} annotators set to {value}"
            ),
        }
    }
}

fn check_all(first: &AnnotationMatrix, rest: &[AnnotationMatrix]) -> Result<(), MetricsError> {
    for m in rest {
        check_pair(first, m).map_err(MetricsError::Alignment)?;
    }
    Ok(())
}

fn labels(annotators: &[AnnotationMatrix]) -> String {
    annotators.iter().map(|a| a.annotator().label.as_str()).collect::<Vec<_>>().join("+")
}

/// Reference in which every cell where some annotator agrees with `pred`
/// takes the predicted value; elsewhere the annotators are unanimous and
/// their value is used.
pub fn minimum_match_gold(
    pred: &AnnotationMatrix,
    annotators: &[AnnotationMatrix],
) -> Result<AnnotationMatrix, MetricsError> {
    if annotators.is_empty() {
        return Err(MetricsError::NoAnnotators);
    }
    check_all(pred, annotators)?;
    let cells = (0..pred.cells().len())
        .map(|i| {
            let p = pred.cells()[i];
            if annotators.iter().any(|a| a.cells()[i] == p) {
                p
            } else {
                annotators[0].cells()[i]
            }
        })
        .collect();
    let gold = AnnotationMatrix::new(
        pred.narrative_id(),
        pred.codebook_version(),
        AnnotatorId::human(format!("minimum_match({})", labels(annotators))),
        pred.codes().to_vec(),
        cells,
    )
    .expect("shape copied from an aligned matrix");
    Ok(gold)
}

/// Cell-wise strict majority of the annotators; exact ties take `tie`.
pub fn majority_gold(
    annotators: &[AnnotationMatrix],
    tie: TieBreak,
) -> Result<(AnnotationMatrix, Vec<MetricsWarning>), MetricsError> {
    if annotators.len() < 2 {
        return Err(MetricsError::TooFewAnnotators(annotators.len()));
    }
    let first = &annotators[0];
    check_all(first, &annotators[1..])?;
    let total = annotators.len();
    let mut ties = 0usize;
    let cells = (0..first.cells().len())
        .map(|i| {
            let ones = annotators.iter().filter(|a| a.cells()[i] == 1).count();
            if 2 * ones == total {
                ties += 1;
            }
            majority_cell(ones, total, tie)
        })
        .collect();
    let gold = AnnotationMatrix::new(
        first.narrative_id(),
        first.codebook_version(),
        AnnotatorId::human(format!("majority({})", labels(annotators))),
        first.codes().to_vec(),
        cells,
    )
    .expect("shape copied from an aligned matrix");
    let mut warnings = Vec::new();
    if ties > 0 {
        warnings.push(MetricsWarning::TieBreakApplied {
            narrative_id: first.narrative_id().into(),
            annotators: total,
            cells: ties,
            value: tie.value(),
        });
    }
    Ok((gold, warnings))
}
