//! Binary sentence-by-code annotation matrices.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::Codebook;
use crate::corpus::NarrativeDocument;
use crate::prompting::Exchange;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotatorKind {
    Human,
    ModelRun,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotatorId {
    pub kind: AnnotatorKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    /// One-based run number; `None` for humans and aggregated matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_variant: Option<String>,
}

impl AnnotatorId {
    pub fn human(label: impl Into<String>) -> Self {
        AnnotatorId {
            kind: AnnotatorKind::Human,
            label: label.into(),
            model_name: None,
            run_index: None,
            prompt_variant: None,
        }
    }

    pub fn model_run(model: &str, run_index: usize, prompt_variant: &str) -> Self {
        AnnotatorId {
            kind: AnnotatorKind::ModelRun,
            label: format!("{model}/run{run_index}"),
            model_name: Some(model.to_string()),
            run_index: Some(run_index),
            prompt_variant: Some(prompt_variant.to_string()),
        }
    }

    pub fn model_majority(model: &str, prompt_variant: Option<String>) -> Self {
        AnnotatorId {
            kind: AnnotatorKind::ModelRun,
            label: format!("{model}/majority"),
            model_name: Some(model.to_string()),
            run_index: None,
            prompt_variant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "rows")]
    Rows,
    #[serde(rename = "columns")]
    Columns,
}

/// A single reason a matrix does not line up with its document or codebook.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum Violation {
    #[error("{axis:?} mismatch: expected {expected}, found {found}")]
    DimensionMismatch { axis: Axis, expected: usize, found: usize },
    #[error("column {column} is {found:?}, expected {expected:?}")]
    CodeMismatch { column: usize, expected: String, found: String },
    #[error("narrative {found:?} does not match {expected:?}")]
    NarrativeMismatch { expected: String, found: String },
    #[error("codebook version {found:?} does not match {expected:?}")]
    CodebookVersionMismatch { expected: String, found: String },
    #[error("cell ({row}, {col}) holds {value}, expected 0 or 1")]
    NonBinaryCell { row: usize, col: usize, value: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("expected {expected} cells for the declared shape, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("matrix has no sentences")]
    EmptyMatrix,
}

/// One annotator's (or one run's) labels, `num_sentences x num_codes`, stored
/// row-major. Cells should be 0 or 1; [`validate_alignment`] reports otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct AnnotationMatrix {
    narrative_id: String,
    codebook_version: String,
    annotator: AnnotatorId,
    codes: Vec<String>,
    rows: usize,
    cells: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    narrative_id: String,
    codebook_version: String,
    annotator: AnnotatorId,
    codes: Vec<String>,
    cells: Vec<Vec<u8>>,
}

impl TryFrom<MatrixRepr> for AnnotationMatrix {
    type Error = MatrixError;

    fn try_from(r: MatrixRepr) -> Result<Self, Self::Error> {
        AnnotationMatrix::from_rows(r.narrative_id, r.codebook_version, r.annotator, r.codes, r.cells)
    }
}

impl From<AnnotationMatrix> for MatrixRepr {
    fn from(m: AnnotationMatrix) -> Self {
        let cells = m.row_iter().map(<[u8]>::to_vec).collect();
        MatrixRepr {
            narrative_id: m.narrative_id,
            codebook_version: m.codebook_version,
            annotator: m.annotator,
            codes: m.codes,
            cells,
        }
    }
}

impl AnnotationMatrix {
    pub fn new(
        narrative_id: impl Into<String>,
        codebook_version: impl Into<String>,
        annotator: AnnotatorId,
        codes: Vec<String>,
        cells: Vec<u8>,
    ) -> Result<Self, MatrixError> {
        let cols = codes.len();
        let rows = cells.len().checked_div(cols).unwrap_or(0);
        if rows * cols != cells.len() {
            return Err(MatrixError::ShapeMismatch { expected: rows * cols, found: cells.len() });
        }
        Ok(AnnotationMatrix {
            narrative_id: narrative_id.into(),
            codebook_version: codebook_version.into(),
            annotator,
            codes,
            rows,
            cells,
        })
    }

    pub fn from_rows(
        narrative_id: impl Into<String>,
        codebook_version: impl Into<String>,
        annotator: AnnotatorId,
        codes: Vec<String>,
        rows: Vec<Vec<u8>>,
    ) -> Result<Self, MatrixError> {
        let cols = codes.len();
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(MatrixError::RaggedRow { row, expected: cols, found: r.len() });
            }
            cells.extend_from_slice(r);
        }
        let mut m = Self::new(narrative_id, codebook_version, annotator, codes, cells)?;
        m.rows = rows.len();
        Ok(m)
    }

    /// An all-zero matrix shaped for `doc` and `cb`.
    pub fn zeros(doc: &NarrativeDocument, cb: &Codebook, annotator: AnnotatorId) -> Self {
        AnnotationMatrix {
            narrative_id: doc.id().to_string(),
            codebook_version: cb.version().to_string(),
            annotator,
            codes: cb.ids().map(str::to_string).collect(),
            rows: doc.len(),
            cells: alloc::vec![0; doc.len() * cb.len()],
        }
    }

    pub fn narrative_id(&self) -> &str {
        &self.narrative_id
    }

    pub fn codebook_version(&self) -> &str {
        &self.codebook_version
    }

    pub fn annotator(&self) -> &AnnotatorId {
        &self.annotator
    }

    pub fn with_annotator(mut self, annotator: AnnotatorId) -> Self {
        self.annotator = annotator;
        self
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn num_sentences(&self) -> usize {
        self.rows
    }

    pub fn num_codes(&self) -> usize {
        self.codes.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.codes.len() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        let cols = self.codes.len();
        self.cells[row * cols + col] = value;
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn row(&self, row: usize) -> &[u8] {
        let cols = self.codes.len();
        &self.cells[row * cols..(row + 1) * cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[u8]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn column(&self, col: usize) -> Vec<u8> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn column_of(&self, code: &str) -> Option<Vec<u8>> {
        self.codes.iter().position(|c| c == code).map(|i| self.column(i))
    }

    /// Cells holding something other than 0 or 1.
    pub fn non_binary_cells(&self) -> impl Iterator<Item = Violation> + '_ {
        let cols = self.codes.len().max(1);
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 1)
            .map(move |(i, &value)| Violation::NonBinaryCell { row: i / cols, col: i % cols, value })
    }
}

/// Checks `m` against the document and codebook it claims to annotate.
pub fn validate_alignment(
    m: &AnnotationMatrix,
    doc: &NarrativeDocument,
    cb: &Codebook,
) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if m.narrative_id != doc.id() {
        violations.push(Violation::NarrativeMismatch {
            expected: doc.id().to_string(),
            found: m.narrative_id.clone(),
        });
    }
    if m.codebook_version != cb.version() {
        violations.push(Violation::CodebookVersionMismatch {
            expected: cb.version().to_string(),
            found: m.codebook_version.clone(),
        });
    }
    if m.rows != doc.len() {
        violations.push(Violation::DimensionMismatch { axis: Axis::Rows, expected: doc.len(), found: m.rows });
    }
    if m.codes.len() != cb.len() {
        violations.push(Violation::DimensionMismatch {
            axis: Axis::Columns,
            expected: cb.len(),
            found: m.codes.len(),
        });
    } else {
        for (column, (found, expected)) in m.codes.iter().zip(cb.ids()).enumerate() {
            if found != expected {
                violations.push(Violation::CodeMismatch {
                    column,
                    expected: expected.to_string(),
                    found: found.clone(),
                });
            }
        }
    }
    violations.extend(m.non_binary_cells());
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Checks that two matrices describe the same narrative, codes and sentences,
/// and that both are binary.
pub fn check_pair(a: &AnnotationMatrix, b: &AnnotationMatrix) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if a.narrative_id != b.narrative_id {
        violations.push(Violation::NarrativeMismatch {
            expected: a.narrative_id.clone(),
            found: b.narrative_id.clone(),
        });
    }
    if a.codebook_version != b.codebook_version {
        violations.push(Violation::CodebookVersionMismatch {
            expected: a.codebook_version.clone(),
            found: b.codebook_version.clone(),
        });
    }
    if a.rows != b.rows {
        violations.push(Violation::DimensionMismatch { axis: Axis::Rows, expected: a.rows, found: b.rows });
    }
    if a.codes.len() != b.codes.len() {
        violations.push(Violation::DimensionMismatch {
            axis: Axis::Columns,
            expected: a.codes.len(),
            found: b.codes.len(),
        });
    } else {
        for (column, (x, y)) in a.codes.iter().zip(&b.codes).enumerate() {
            if x != y {
                violations.push(Violation::CodeMismatch { column, expected: x.clone(), found: y.clone() });
            }
        }
    }
    violations.extend(a.non_binary_cells());
    violations.extend(b.non_binary_cells());
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Value used for a cell when the vote is split exactly in half.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    #[default]
    Zero,
    One,
}

impl TieBreak {
    pub fn value(self) -> u8 {
        match self {
            TieBreak::Zero => 0,
            TieBreak::One => 1,
        }
    }
}

/// 1 iff strictly more than half of `total` votes are 1; exact ties take `tie`.
pub fn majority_cell(ones: usize, total: usize, tie: TieBreak) -> u8 {
    let twice = 2 * ones;
    if twice > total {
        1
    } else if twice == total {
        tie.value()
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub run_index: usize,
    pub exchanges: Vec<Exchange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailure {
    pub run_index: usize,
    pub error: String,
}

/// Matrices from repeated model runs over one narrative, with their provider
/// transcripts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSet {
    pub narrative_id: String,
    pub model_name: String,
    #[serde(default)]
    pub prompt_variant: Option<String>,
    #[serde(default)]
    pub runs: Vec<AnnotationMatrix>,
    #[serde(default)]
    pub failures: Vec<RunFailure>,
    #[serde(default)]
    pub transcripts: Vec<RunTranscript>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VoteError {
    #[error("run set has no runs")]
    EmptyRunSet,
    #[error("runs are not aligned: {0:?}")]
    Misaligned(Vec<Violation>),
}

impl RunSet {
    /// Checks the run-set invariants: at least one run, all aligned.
    pub fn validate(&self) -> Result<(), VoteError> {
        let first = self.runs.first().ok_or(VoteError::EmptyRunSet)?;
        let mut violations = Vec::new();
        for run in &self.runs {
            if let Err(v) = check_pair(first, run) {
                violations.extend(v);
            }
            if run.narrative_id != self.narrative_id {
                violations.push(Violation::NarrativeMismatch {
                    expected: self.narrative_id.clone(),
                    found: run.narrative_id.clone(),
                });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(VoteError::Misaligned(violations))
        }
    }
}

/// Cell-wise majority over all runs. The result is labeled `<model>/majority`.
pub fn majority_vote(runs: &RunSet, tie: TieBreak) -> Result<AnnotationMatrix, VoteError> {
    runs.validate()?;
    let first = &runs.runs[0];
    let cells = (0..first.cells.len())
        .map(|i| {
            let ones = runs.runs.iter().filter(|m| m.cells[i] == 1).count();
            majority_cell(ones, runs.runs.len(), tie)
        })
        .collect();
    Ok(AnnotationMatrix {
        narrative_id: first.narrative_id.clone(),
        codebook_version: first.codebook_version.clone(),
        annotator: AnnotatorId::model_majority(&runs.model_name, runs.prompt_variant.clone()),
        codes: first.codes.clone(),
        rows: first.rows,
        cells,
    })
}

/// Percentage (0 to 100) of sentences carrying each code, in column order.
pub fn code_frequencies(m: &AnnotationMatrix) -> Result<Vec<f64>, MatrixError> {
    if m.rows == 0 {
        return Err(MatrixError::EmptyMatrix);
    }
    Ok((0..m.num_codes())
        .map(|c| {
            let ones = (0..m.rows).filter(|&r| m.get(r, c) == 1).count();
            100.0 * ones as f64 / m.rows as f64
        })
        .collect())
}

/// Unweighted mean over narratives of the per-narrative code percentages.
pub fn corpus_frequencies(matrices: &[AnnotationMatrix]) -> Result<Vec<f64>, MatrixError> {
    let first = matrices.first().ok_or(MatrixError::EmptyMatrix)?;
    let mut sums = alloc::vec![0.0; first.num_codes()];
    for m in matrices {
        let f = code_frequencies(m)?;
        if f.len() != sums.len() {
            return Err(MatrixError::ShapeMismatch { expected: sums.len(), found: f.len() });
        }
        for (s, v) in sums.iter_mut().zip(f) {
            *s += v;
        }
    }
    let n = matrices.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}
