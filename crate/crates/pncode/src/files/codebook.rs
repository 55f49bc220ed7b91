use std::path::Path;

use pncode_core::codebook::{CodebookError, CodebookFile};
use pncode_core::Codebook;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodebookLoadError {
    #[error("cannot read codebook: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed codebook file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid codebook: {0}")]
    Validation(#[from] CodebookError),
}

/// Parses a codebook TOML document:
///
/// ```toml
/// version = "pn14-final"
///
/// [[codes]]
/// id = "self"
/// name = "Story of Self"
/// group = "categorical"   # categorical | structural | content
/// definition = "..."
/// ```
pub fn load_codebook(source: &str) -> Result<Codebook, CodebookLoadError> {
    let file: CodebookFile = toml::from_str(source)?;
    Ok(Codebook::try_from(file)?)
}

pub fn load_codebook_file(path: &Path) -> Result<Codebook, CodebookLoadError> {
    load_codebook(&std::fs::read_to_string(path)?)
}

pub fn save_codebook(cb: &Codebook) -> String {
    toml::to_string(&CodebookFile::from(cb.clone())).expect("codebook serializes to TOML")
}
