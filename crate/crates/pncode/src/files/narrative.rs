//! Narrative documents on disk.
//!
//! Raw transcripts are plain UTF-8 text and are segmented on load.
//! Pre-segmented documents are JSON Lines: an optional first line
//! `{"id": ..., "title": ..., "source": ...}` followed by one
//! `{"index": n, "text": "..."}` record per sentence in order. Their sentences
//! are taken verbatim.

use std::io::Write;
use std::path::Path;

use pncode_core::corpus::CorpusError;
use pncode_core::text::nfc;
use pncode_core::{NarrativeDocument, Sentence};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NarrativeFormat {
    /// Plain text, segmented on load.
    RawText,
    /// JSON Lines, one sentence per record.
    Segmented,
    /// `.txt` is raw text, anything else is segmented.
    Auto,
}

#[derive(Debug, Error)]
pub enum NarrativeError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{0}: document has no sentences")]
    EmptyDocument(String),
}

#[derive(Serialize, Deserialize)]
struct Header {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    index: usize,
    text: String,
}

pub fn load_narrative(path: &Path, format: NarrativeFormat) -> Result<NarrativeDocument, NarrativeError> {
    let shown = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| NarrativeError::Io { path: shown.clone(), source })?;
    let format = match format {
        NarrativeFormat::Auto if path.extension().is_some_and(|e| e == "txt") => NarrativeFormat::RawText,
        NarrativeFormat::Auto => NarrativeFormat::Segmented,
        f => f,
    };
    match format {
        NarrativeFormat::RawText => NarrativeDocument::from_text(stem(path), &content).map_err(|e| match e {
            CorpusError::EmptyDocument => NarrativeError::EmptyDocument(shown),
            other => NarrativeError::Parse { path: shown, line: 0, message: other.to_string() },
        }),
        _ => parse_segmented(&content, path),
    }
}

fn parse_segmented(content: &str, path: &Path) -> Result<NarrativeDocument, NarrativeError> {
    let shown = path.display().to_string();
    let parse_err = |line: usize, message: String| NarrativeError::Parse { path: shown.clone(), line, message };
    let mut header: Option<Header> = None;
    let mut sentences = Vec::new();
    for (n, line) in content.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| parse_err(line_no, e.to_string()))?;
        if sentences.is_empty() && header.is_none() && value.get("index").is_none() {
            header = Some(serde_json::from_value(value).map_err(|e| parse_err(line_no, e.to_string()))?);
            continue;
        }
        let record: Record = serde_json::from_value(value).map_err(|e| parse_err(line_no, e.to_string()))?;
        sentences.push(Sentence { index: record.index, text: nfc(&record.text) });
    }
    let header = header.unwrap_or(Header { id: stem(path), title: None, source: None });
    let doc = NarrativeDocument::from_sentences(header.id, sentences).map_err(|e| match e {
        CorpusError::EmptyDocument => NarrativeError::EmptyDocument(shown.clone()),
        other => parse_err(0, other.to_string()),
    })?;
    Ok(doc.with_title(header.title).with_source(header.source))
}

/// Writes `doc` as pre-segmented JSON Lines.
pub fn save_narrative(doc: &NarrativeDocument, path: &Path) -> Result<(), NarrativeError> {
    let io_err = |source| NarrativeError::Io { path: path.display().to_string(), source };
    let mut out = Vec::new();
    let header = Header {
        id: doc.id().to_string(),
        title: doc.title().map(str::to_string),
        source: doc.source().map(str::to_string),
    };
    serde_json::to_writer(&mut out, &header).expect("header serializes");
    out.push(b'\n');
    for s in doc.sentences() {
        serde_json::to_writer(&mut out, &Record { index: s.index, text: s.text.clone() }).expect("record serializes");
        out.push(b'\n');
    }
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(&out).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, content).unwrap();
        p
    }

    #[test]
    fn raw_text_is_segmented() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "story.txt", "I marched. We sang!\nNow we act.");
        let doc = load_narrative(&p, NarrativeFormat::Auto).unwrap();
        assert_eq!(doc.id(), "story");
        assert_eq!(doc.len(), 3);
    }

    #[test]
    fn round_trip_and_edit() {
        let dir = tempfile::tempdir().unwrap();
        let doc = NarrativeDocument::from_text("abc", "I marched. We sang \"loud\"! Now?")
            .unwrap()
            .with_title(Some("March".into()));
        let p = dir.path().join("out.jsonl");
        save_narrative(&doc, &p).unwrap();
        let back = load_narrative(&p, NarrativeFormat::Auto).unwrap();
        assert_eq!(back, doc);
        let text = std::fs::read_to_string(&p).unwrap().replace("I marched.", "I walked.");
        std::fs::write(&p, text).unwrap();
        assert_ne!(load_narrative(&p, NarrativeFormat::Segmented).unwrap(), doc);
    }

    #[test]
    fn non_contiguous_indices() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "gap.jsonl",
            "{\"index\":0,\"text\":\"A.\"}\n{\"index\":1,\"text\":\"B.\"}\n{\"index\":3,\"text\":\"C.\"}\n",
        );
        assert!(matches!(load_narrative(&p, NarrativeFormat::Auto), Err(NarrativeError::Parse { .. })));
    }

    #[test]
    fn empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "empty.txt", "");
        assert!(matches!(load_narrative(&p, NarrativeFormat::Auto), Err(NarrativeError::EmptyDocument(_))));
        let p = write(dir.path(), "empty.jsonl", "{\"id\":\"x\"}\n");
        assert!(matches!(load_narrative(&p, NarrativeFormat::Auto), Err(NarrativeError::EmptyDocument(_))));
    }

    #[test]
    fn unwritable_path() {
        let doc = NarrativeDocument::from_text("abc", "Hi.").unwrap();
        let err = save_narrative(&doc, Path::new("/nonexistent-dir/x/out.jsonl")).unwrap_err();
        assert!(matches!(err, NarrativeError::Io { .. }));
    }
}
