//! On-disk formats: codebook TOML, pre-segmented narrative JSONL, annotation
//! CSV/JSON and run-set JSON.

mod annotation;
mod codebook;
mod narrative;

pub use annotation::{
    import_human_csv, read_matrix, read_matrix_csv, read_run_set, write_matrix, write_matrix_csv, write_run_set,
    AnnotationFileError,
};
pub use codebook::{load_codebook, load_codebook_file, save_codebook, CodebookLoadError};
pub use narrative::{load_narrative, save_narrative, NarrativeError, NarrativeFormat};

use std::path::Path;

/// File stem used as a default identifier.
pub(crate) fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.split('.').next().unwrap_or(s).to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "narrative".to_string())
}
