//! Narrative documents and rule-based sentence segmentation.
//!
//! Segmentation rules:
//!
//! * a boundary follows a run of `.`, `!` or `?` (plus any closing quotes or
//!   brackets) when whitespace comes next and the following character is an
//!   uppercase letter, a digit or an opening quote;
//! * a lone `.` closing one of [`ABBREVIATIONS`] (case-insensitive) never ends
//!   a sentence;
//! * a blank line (two or more line breaks separated only by whitespace) is
//!   always a boundary;
//! * whitespace inside a sentence collapses to single spaces.
//!
//! Decimal numbers never split because the `.` is not followed by whitespace.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

use crate::text::{nfc, normalize_whitespace};

/// Tokens whose trailing period does not end a sentence.
pub const ABBREVIATIONS: [&str; 13] = [
    "mr", "mrs", "ms", "dr", "prof", "st", "vs", "etc", "e.g", "i.e", "u.s", "a.m", "p.m",
];

const TERMINALS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 8] = ['"', '\'', '\u{201d}', '\u{2019}', ')', ']', '}', '\u{bb}'];
const OPENERS: [char; 6] = ['"', '\'', '\u{201c}', '\u{2018}', '\u{ab}', '('];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("document has no sentences")]
    EmptyDocument,
    #[error("document id must be non-empty")]
    EmptyId,
    #[error("sentence at position {position} has index {found}")]
    NonContiguousIndex { position: usize, found: usize },
    #[error("sentence {index}: {reason}")]
    InvalidSentenceText { index: usize, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

/// An ordered, non-empty list of sentences with contiguous zero-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NarrativeDocument {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    sentences: Vec<Sentence>,
}

impl NarrativeDocument {
    /// Builds a document from already segmented sentences, taken verbatim.
    pub fn from_sentences(id: impl Into<String>, sentences: Vec<Sentence>) -> Result<Self, CorpusError> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(CorpusError::EmptyId);
        }
        if sentences.is_empty() {
            return Err(CorpusError::EmptyDocument);
        }
        for (position, s) in sentences.iter().enumerate() {
            if s.index != position {
                return Err(CorpusError::NonContiguousIndex { position, found: s.index });
            }
            check_sentence_text(s)?;
        }
        Ok(NarrativeDocument { id, title: None, source: None, sentences })
    }

    /// NFC-normalizes and segments raw transcript text.
    pub fn from_text(id: impl Into<String>, text: &str) -> Result<Self, CorpusError> {
        Self::from_sentences(id, segment_sentences(&nfc(text)))
    }

    pub fn with_title(mut self, title: Option<String>) -> Self {
        self.title = title;
        self
    }

    pub fn with_source(mut self, source: Option<String>) -> Self {
        self.source = source;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> Option<&str> {
        self.title.as_deref()
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Sentence texts joined by single spaces.
    pub fn joined_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&s.text);
        }
        out
    }
}

fn check_sentence_text(s: &Sentence) -> Result<(), CorpusError> {
    let bad = |reason| Err(CorpusError::InvalidSentenceText { index: s.index, reason });
    if s.text.trim().is_empty() {
        return bad("empty text");
    }
    if s.text.trim() != s.text {
        return bad("leading or trailing whitespace");
    }
    if s.text.contains(['\n', '\r']) {
        return bad("line break inside sentence");
    }
    Ok(())
}

/// Splits `text` into sentences. Pure and deterministic; empty input yields an
/// empty list. Text is not Unicode-normalized here.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let n = chars.len();
    let byte_at = |i: usize| if i < n { chars[i].0 } else { text.len() };

    let mut pieces: Vec<&str> = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < n {
        let c = chars[i].1;
        if c.is_whitespace() {
            let mut k = i;
            let mut newlines = 0;
            while k < n && chars[k].1.is_whitespace() {
                if chars[k].1 == '\n' {
                    newlines += 1;
                }
                k += 1;
            }
            if newlines >= 2 {
                pieces.push(&text[start..byte_at(i)]);
                start = byte_at(k);
            }
            i = k;
            continue;
        }
        if !TERMINALS.contains(&c) {
            i += 1;
            continue;
        }

        let mut j = i;
        while j < n && TERMINALS.contains(&chars[j].1) {
            j += 1;
        }
        let lone_period = c == '.' && j == i + 1;
        while j < n && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        if j < n && chars[j].1.is_whitespace() {
            let mut k = j;
            while k < n && chars[k].1.is_whitespace() {
                k += 1;
            }
            if k < n && starts_sentence(chars[k].1) && !(lone_period && is_abbreviation(text, byte_at(i))) {
                pieces.push(&text[start..byte_at(j)]);
                start = byte_at(k);
                i = k;
                continue;
            }
        }
        i = j;
    }
    pieces.push(&text[start..]);

    pieces
        .into_iter()
        .map(normalize_whitespace)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(index, text)| Sentence { index, text })
        .collect()
}

fn starts_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_numeric() || OPENERS.contains(&c)
}

/// Whether the word ending right before the period at byte `dot` is a listed
/// abbreviation.
fn is_abbreviation(text: &str, dot: usize) -> bool {
    let before = &text[..dot];
    let word_start = before
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = before[word_start..].trim_start_matches(|c: char| OPENERS.contains(&c) || c == '[');
    let word = word.to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Sentence texts of `sentences`, for convenience in tests and callers.
pub fn texts(sentences: &[Sentence]) -> Vec<String> {
    sentences.iter().map(|s| s.text.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn seg(t: &str) -> Vec<String> {
        texts(&segment_sentences(t))
    }

    #[test]
    fn splits_on_terminal_punctuation() {
        assert_eq!(seg("I marched. We sang!"), ["I marched.", "We sang!"]);
        assert_eq!(seg("Really?! Yes. 42 people came."), ["Really?!", "Yes.", "42 people came."]);
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(seg("Dr. Ganz spoke to us."), ["Dr. Ganz spoke to us."]);
        assert_eq!(seg("We met at 9 a.m. Then we left."), ["We met at 9 a.m. Then we left."]);
        assert_eq!(seg("I moved to the U.S. Later I studied."), ["I moved to the U.S. Later I studied."]);
        assert_eq!(seg("(Mr. Lee) came."), ["(Mr. Lee) came."]);
    }

    #[test]
    fn no_split_before_lowercase_or_inside_numbers() {
        assert_eq!(seg("It cost 3.5 dollars. and more"), ["It cost 3.5 dollars. and more"]);
        assert_eq!(seg("Version 2.0 shipped."), ["Version 2.0 shipped."]);
    }

    #[test]
    fn closing_quotes_stay_with_sentence() {
        assert_eq!(
            seg("She said \"Go.\" Then \"we ran.\" \"Why?\" he asked."),
            ["She said \"Go.\"", "Then \"we ran.\"", "\"Why?\" he asked."]
        );
    }

    #[test]
    fn blank_line_is_hard_boundary() {
        assert_eq!(seg("a title\n\nthen text\nwraps here."), ["a title", "then text wraps here."]);
        assert_eq!(seg("one\r\n  \r\ntwo"), ["one", "two"]);
    }

    #[test]
    fn ellipsis_splits_before_capital() {
        assert_eq!(seg("I waited... Nothing came."), ["I waited...", "Nothing came."]);
    }

    #[test]
    fn empty_and_blank_input() {
        assert!(seg("").is_empty());
        assert!(seg(" \n\t ").is_empty());
    }

    #[test]
    fn document_rejects_gaps() {
        let s = |index, text: &str| Sentence { index, text: text.to_string() };
        let err = NarrativeDocument::from_sentences("d", vec![s(0, "a"), s(1, "b"), s(3, "c")]).unwrap_err();
        assert_eq!(err, CorpusError::NonContiguousIndex { position: 2, found: 3 });
        assert_eq!(NarrativeDocument::from_sentences("d", vec![]).unwrap_err(), CorpusError::EmptyDocument);
        assert!(NarrativeDocument::from_sentences("d", vec![s(0, " a")]).is_err());
        assert_eq!(NarrativeDocument::from_text("d", "  ").unwrap_err(), CorpusError::EmptyDocument);
    }

    #[test]
    fn from_text_normalizes_to_nfc() {
        let doc = NarrativeDocument::from_text("d", "Cafe\u{301} opened. We came.").unwrap();
        assert_eq!(doc.sentences()[0].text, "Caf\u{e9} opened.");
        assert_eq!(doc.len(), 2);
    }
}
