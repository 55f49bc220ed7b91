use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{Map, Value};
use thiserror::Error;

use super::{StageOutput, StageRecord};
use crate::codebook::{Code, Codebook, Stage};
use crate::corpus::NarrativeDocument;
use crate::text::match_key;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no JSON array of records found in the response")]
    NoJsonFound,
    #[error("found {count} candidate JSON arrays, expected exactly one")]
    MultipleJsonArrays { count: usize },
    #[error("expected {expected} records, found {found}")]
    RecordCountMismatch { expected: usize, found: usize },
    #[error("record {index} is not a JSON object")]
    MalformedRecord { index: usize },
    #[error("record at position {position} declares index {found}")]
    IndexMismatch { position: usize, found: String },
    #[error("record {index} does not reproduce the sentence text")]
    SentenceTextMismatch { index: usize },
    #[error("record {index} lacks a field for code {code:?}")]
    MissingCodeField { index: usize, code: String },
    #[error("record {index} has a non-binary value for code {code:?}")]
    NonBinaryValue { index: usize, code: String },
}

const INDEX_KEYS: [&str; 4] = ["index", "sentence_index", "line_number", "line_index"];
const TEXT_KEYS: [&str; 4] = ["text", "sentence", "sentence_text", "line"];

/// Lowercases and folds every run of non-alphanumerics into one `_`.
pub fn normalize_key(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    let mut gap = false;
    for c in key.chars() {
        if c.is_alphanumeric() {
            if gap && !out.is_empty() {
                out.push('_');
            }
            gap = false;
            out.extend(c.to_lowercase());
        } else {
            gap = true;
        }
    }
    out
}

fn key_matches(key: &str, code: &Code) -> bool {
    let key = normalize_key(key);
    let name = normalize_key(&code.display_name);
    key == code.id || key == name || name.strip_prefix("story_of_") == Some(key.as_str())
}

/// Every top-level JSON array in `content` whose elements are all objects.
/// Arrays nested inside a candidate are not reported separately.
fn candidate_arrays(content: &str) -> Vec<Vec<Value>> {
    let mut found = Vec::new();
    let mut pos = 0;
    while let Some(offset) = content[pos..].find('[') {
        let start = pos + offset;
        let mut stream = serde_json::Deserializer::from_str(&content[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Array(items))) if items.iter().all(Value::is_object) => {
                pos = start + stream.byte_offset();
                found.push(items);
            }
            Some(Ok(_)) => pos = start + stream.byte_offset(),
            _ => pos = start + 1,
        }
    }
    found
}

fn find_field<'a>(obj: &'a Map<String, Value>, keys: &[&str]) -> Option<&'a Value> {
    obj.iter().find(|(k, _)| keys.contains(&normalize_key(k).as_str())).map(|(_, v)| v)
}

/// Extracts the single JSON array of per-sentence records from a model reply
/// and checks it against the narrative and the stage's codes.
///
/// Prose and code fences around the array are ignored. Fields for codes of
/// other stages are ignored. More than one candidate array is an error.
pub fn parse_stage_response(
    content: &str,
    stage: Stage,
    doc: &NarrativeDocument,
    cb: &Codebook,
) -> Result<StageOutput, ParseError> {
    let mut candidates = candidate_arrays(content);
    let records = match candidates.len() {
        0 => return Err(ParseError::NoJsonFound),
        1 => candidates.pop().expect("one candidate"),
        count => return Err(ParseError::MultipleJsonArrays { count }),
    };
    if records.len() != doc.len() {
        return Err(ParseError::RecordCountMismatch { expected: doc.len(), found: records.len() });
    }

    let codes = cb.codes_for_stage(stage);
    let mut out = Vec::with_capacity(records.len());
    for (position, (record, sentence)) in records.iter().zip(doc.sentences()).enumerate() {
        let obj = record.as_object().ok_or(ParseError::MalformedRecord { index: position })?;
        if let Some(idx) = find_field(obj, &INDEX_KEYS) {
            if idx.as_u64() != Some(position as u64) {
                return Err(ParseError::IndexMismatch { position, found: idx.to_string() });
            }
        }
        let text = find_field(obj, &TEXT_KEYS)
            .and_then(Value::as_str)
            .ok_or(ParseError::SentenceTextMismatch { index: position })?;
        if match_key(text) != match_key(&sentence.text) {
            return Err(ParseError::SentenceTextMismatch { index: position });
        }
        let mut values = Vec::with_capacity(codes.len());
        for code in &codes {
            let value = obj
                .iter()
                .find(|(k, _)| key_matches(k, code))
                .map(|(_, v)| v)
                .ok_or_else(|| ParseError::MissingCodeField { index: position, code: code.id.clone() })?;
            match value.as_u64() {
                Some(v @ (0 | 1)) => values.push(v as u8),
                _ => return Err(ParseError::NonBinaryValue { index: position, code: code.id.clone() }),
            }
        }
        out.push(StageRecord { index: position, text: sentence.text.clone(), values });
    }
    Ok(StageOutput {
        stage,
        codes: codes.iter().map(|c| c.id.clone()).collect(),
        records: out,
        raw_response: content.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::default_codebook;

    fn doc() -> NarrativeDocument {
        NarrativeDocument::from_text("d", "I marched. We sang! Now we act.").unwrap()
    }

    fn parse(content: &str) -> Result<StageOutput, ParseError> {
        parse_stage_response(content, Stage::ONE, &doc(), &default_codebook())
    }

    const VALID: &str = r#"[
        {"index": 0, "text": "I marched.", "self": 1, "us": 0, "now": 0},
        {"index": 1, "text": "We sang!", "self": 0, "us": 1, "now": 0},
        {"index": 2, "text": "Now we act.", "self": 0, "us": 1, "now": 1}
    ]"#;

    #[test]
    fn valid_array() {
        let out = parse(VALID).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.value(2, "now"), Some(1));
        assert_eq!(out.codes, ["self", "us", "now"]);
    }

    #[test]
    fn fenced_with_preamble() {
        let content = alloc::format!("Here are the annotations you asked for:\n\n```json\n{VALID}\n```\nLet me know!");
        assert_eq!(parse(&content).unwrap().records, parse(VALID).unwrap().records);
    }

    #[test]
    fn display_name_keys_are_accepted() {
        let content = r#"[{"sentence": "I marched.", "Story of Self": 1, "Story of Us": 0, "Story of Now": 0},
            {"sentence": "We  sang!", "Story of Self": 0, "Story of Us": 1, "Story of Now": 0},
            {"sentence": "Now we act.", "story_of_self": 0, "story_of_us": 1, "story_of_now": 1}]"#;
        assert_eq!(parse(content).unwrap().value(1, "us"), Some(1));
    }

    #[test]
    fn short_array() {
        let two = r#"[{"text": "I marched.", "self": 1, "us": 0, "now": 0},
                      {"text": "We sang!", "self": 0, "us": 1, "now": 0}]"#;
        assert_eq!(parse(two), Err(ParseError::RecordCountMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn edited_text_and_bad_values() {
        let edited = VALID.replace("We sang!", "We sang loudly!");
        assert_eq!(parse(&edited), Err(ParseError::SentenceTextMismatch { index: 1 }));
        let two = VALID.replacen("\"now\": 1", "\"now\": 2", 1);
        assert_eq!(parse(&two), Err(ParseError::NonBinaryValue { index: 2, code: "now".into() }));
        let missing = VALID.replacen(", \"us\": 0, \"now\": 0}", ", \"us\": 0}", 1);
        assert_eq!(parse(&missing), Err(ParseError::MissingCodeField { index: 0, code: "now".into() }));
    }

    #[test]
    fn zero_or_many_arrays() {
        assert_eq!(parse("I could not do this."), Err(ParseError::NoJsonFound));
        let twice = alloc::format!("{VALID}\nCorrected:\n{VALID}");
        assert_eq!(parse(&twice), Err(ParseError::MultipleJsonArrays { count: 2 }));
        // bracketed prose and number lists are not record arrays
        let noisy = alloc::format!("[note] scores [1, 2]\n{VALID}");
        assert!(parse(&noisy).is_ok());
    }

    #[test]
    fn wrapped_in_object() {
        let content = alloc::format!("{{\"annotations\": {VALID}}}");
        assert!(parse(&content).is_ok());
    }

    #[test]
    fn key_normalization() {
        assert_eq!(normalize_key("Call-to-Action"), "call_to_action");
        assert_eq!(normalize_key("  Story of  Self "), "story_of_self");
    }
}
