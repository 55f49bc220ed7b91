//! Annotation matrices on disk.
//!
//! CSV: an optional first line `# annotator: <label>`, then a header row
//! `sentence_index,<code ids...>` and one row per sentence with cells `0`/`1`.
//! Columns are matched by code id; other columns (e.g. `text`) are ignored.
//! JSON: the serialized matrix with its provenance.

use std::path::Path;

use pncode_core::annotation::{validate_alignment, AnnotationMatrix, AnnotatorId, RunSet, Violation};
use pncode_core::{Codebook, NarrativeDocument};
use thiserror::Error;

use super::stem;

#[derive(Debug, Error)]
pub enum AnnotationFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed CSV: {message}")]
    Csv { path: String, message: String },
    #[error("{path}: missing column for code {code:?}")]
    MissingCode { path: String, code: String },
    #[error("{path}: missing sentence_index column")]
    MissingIndexColumn { path: String },
    #[error("{path}: row {row} has sentence_index {found:?}")]
    BadIndex { path: String, row: usize, found: String },
    #[error("{path}: row {row}, code {code:?}: {value:?} is not 0 or 1")]
    NonBinaryCell { path: String, row: usize, code: String, value: String },
    #[error("{path}: malformed JSON: {message}")]
    Json { path: String, message: String },
    #[error("{path}: matrix does not align: {violations:?}")]
    Alignment { path: String, violations: Vec<Violation> },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AnnotationFileError + '_ {
    move |source| AnnotationFileError::Io { path: path.display().to_string(), source }
}

/// Reads an annotation CSV into a matrix with columns in codebook order.
/// The annotator label comes from a `# annotator:` line, else the file stem.
pub fn read_matrix_csv(
    path: &Path,
    narrative_id: &str,
    cb: &Codebook,
    annotator: impl FnOnce(String) -> AnnotatorId,
) -> Result<AnnotationMatrix, AnnotationFileError> {
    let shown = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut label = stem(path);
    let mut body = content.as_str();
    if let Some(first) = content.lines().next() {
        if let Some(meta) = first.strip_prefix('#') {
            if let Some(v) = meta.trim().strip_prefix("annotator:") {
                if !v.trim().is_empty() {
                    label = v.trim().to_string();
                }
            }
            body = &content[first.len()..];
        }
    }

    let csv_err = |e: csv::Error| AnnotationFileError::Csv { path: shown.clone(), message: e.to_string() };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(body.as_bytes());
    let headers = reader.headers().map_err(csv_err)?.clone();
    let index_col = headers
        .iter()
        .position(|h| h == "sentence_index")
        .ok_or_else(|| AnnotationFileError::MissingIndexColumn { path: shown.clone() })?;
    let mut columns = Vec::with_capacity(cb.len());
    for code in cb.ids() {
        let col = headers.iter().position(|h| h == code).ok_or_else(|| AnnotationFileError::MissingCode {
            path: shown.clone(),
            code: code.to_string(),
        })?;
        columns.push((code, col));
    }

    let mut rows = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let idx = record.get(index_col).unwrap_or("");
        if idx.parse::<usize>().ok() != Some(row) {
            return Err(AnnotationFileError::BadIndex { path: shown.clone(), row, found: idx.to_string() });
        }
        let mut cells = Vec::with_capacity(columns.len());
        for &(code, col) in &columns {
            match record.get(col).unwrap_or("") {
                "0" => cells.push(0),
                "1" => cells.push(1),
                other => {
                    return Err(AnnotationFileError::NonBinaryCell {
                        path: shown.clone(),
                        row,
                        code: code.to_string(),
                        value: other.to_string(),
                    })
                }
            }
        }
        rows.push(cells);
    }
    let codes = cb.ids().map(str::to_string).collect();
    AnnotationMatrix::from_rows(narrative_id, cb.version(), annotator(label), codes, rows)
        .map_err(|e| AnnotationFileError::Csv { path: shown, message: e.to_string() })
}

/// Imports a human annotator's spreadsheet export and checks it against the
/// narrative and codebook.
pub fn import_human_csv(
    path: &Path,
    doc: &NarrativeDocument,
    cb: &Codebook,
) -> Result<AnnotationMatrix, AnnotationFileError> {
    let m = read_matrix_csv(path, doc.id(), cb, AnnotatorId::human)?;
    validate_alignment(&m, doc, cb)
        .map_err(|violations| AnnotationFileError::Alignment { path: path.display().to_string(), violations })?;
    Ok(m)
}

pub fn write_matrix_csv(m: &AnnotationMatrix) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["sentence_index".to_string()];
    header.extend(m.codes().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (i, row) in m.row_iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(u8::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes CSV for `.csv` paths, JSON otherwise.
pub fn write_matrix(m: &AnnotationMatrix, path: &Path) -> Result<(), AnnotationFileError> {
    let body = if is_csv(path) {
        write_matrix_csv(m)
    } else {
        let mut s = serde_json::to_string_pretty(m).expect("matrix serializes");
        s.push('\n');
        s
    };
    std::fs::write(path, body).map_err(io_err(path))
}

/// Reads a matrix from JSON, or from CSV for `.csv` paths. CSV carries no
/// narrative id, so `fallback_narrative` is used for it.
pub fn read_matrix(
    path: &Path,
    cb: &Codebook,
    fallback_narrative: Option<&str>,
) -> Result<AnnotationMatrix, AnnotationFileError> {
    if is_csv(path) {
        let narrative = fallback_narrative.map(str::to_string).unwrap_or_else(|| stem(path));
        return read_matrix_csv(path, &narrative, cb, AnnotatorId::human);
    }
    let content = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&content)
        .map_err(|e| AnnotationFileError::Json { path: path.display().to_string(), message: e.to_string() })
}

pub fn write_run_set(rs: &RunSet, path: &Path) -> Result<(), AnnotationFileError> {
    let mut s = serde_json::to_string_pretty(rs).expect("run set serializes");
    s.push('\n');
    std::fs::write(path, s).map_err(io_err(path))
}

pub fn read_run_set(path: &Path) -> Result<RunSet, AnnotationFileError> {
    let content = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&content)
        .map_err(|e| AnnotationFileError::Json { path: path.display().to_string(), message: e.to_string() })
}
