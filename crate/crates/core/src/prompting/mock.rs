//! A deterministic stand-in for a chat model, used for offline runs and tests.
//!
//! The mock reads the stage heading, the numbered code definitions and the
//! narrative lines back out of a user prompt and marks a code on a sentence
//! when the sentence contains one of the code's keywords as a whole,
//! case-insensitive word (see [`MOCK_RULES`]). Codes without a rule are 0.
//! Record keys are the normalized display names (`story_of_self`, ...).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::parse::normalize_key;
use super::{records_json, ProviderRequest, ProviderResponse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MockError {
    #[error("prompt does not match a known stage template: {0}")]
    UnrecognizedPrompt(&'static str),
}

/// Keywords per code, keyed by normalized display name.
pub const MOCK_RULES: [(&str, &[&str]); 14] = [
    ("story_of_self", &["i", "my", "me"]),
    ("story_of_us", &["we", "us", "our", "together"]),
    ("story_of_now", &["now", "today", "tonight"]),
    ("challenge", &["struggle", "problem", "hard", "crisis"]),
    ("choice", &["decided", "chose", "choice"]),
    ("outcome", &["result", "became", "finally"]),
    ("story_details", &["remember", "saw", "heard", "smelled", "years"]),
    ("hope", &["hope", "possible", "can"]),
    ("values", &["believe", "value", "values", "justice", "dignity"]),
    ("vulnerability", &["afraid", "scared", "ashamed", "alone", "cried"]),
    ("urgency", &["urgent", "immediately", "wait", "time"]),
    ("call_to_action", &["join", "act", "must"]),
    ("dream", &["dream", "imagine", "future"]),
    ("nightmare", &["nightmare", "lose", "fear", "worse"]),
];

const HEADINGS: [&str; 3] = ["**CATEGORICAL CODES**:", "**STRUCTURAL CODES**:", "**CONTENT CODES**:"];
const NARRATIVE_OPEN: &str = "\n\n**Public Narrative:**\n";
const NARRATIVE_CLOSE: &str = "\n\n**Output Instructions**\n";

fn keywords(code_key: &str) -> &'static [&'static str] {
    MOCK_RULES.iter().find(|(k, _)| *k == code_key).map(|(_, w)| *w).unwrap_or(&[])
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// Removes a trailing ` [code=0 code=1 ...]` label block.
fn strip_prior_labels(line: &str) -> &str {
    let Some(body) = line.strip_suffix(']') else { return line };
    let Some(open) = body.rfind(" [") else { return line };
    let labels = &body[open + 2..];
    let well_formed = !labels.is_empty()
        && labels.split(' ').all(|pair| match pair.split_once('=') {
            Some((k, v)) => !k.is_empty() && (v == "0" || v == "1"),
            None => false,
        });
    if well_formed {
        &line[..open]
    } else {
        line
    }
}

/// Answers a stage prompt by keyword rules, as a well-formed JSON array.
pub fn mock_complete(request: &ProviderRequest) -> Result<ProviderResponse, MockError> {
    let prompt = request.user_prompt.as_str();
    let heading_end = prompt.find('\n').ok_or(MockError::UnrecognizedPrompt("single line"))?;
    if !HEADINGS.contains(&&prompt[..heading_end]) {
        return Err(MockError::UnrecognizedPrompt("unknown heading"));
    }
    let open = prompt.find(NARRATIVE_OPEN).ok_or(MockError::UnrecognizedPrompt("no narrative section"))?;
    let close = prompt[open..]
        .find(NARRATIVE_CLOSE)
        .map(|i| open + i)
        .ok_or(MockError::UnrecognizedPrompt("no output instructions"))?;

    let mut keys = Vec::new();
    for (n, line) in prompt[heading_end + 1..open].lines().enumerate() {
        let (num, rest) = line.split_once(". ").ok_or(MockError::UnrecognizedPrompt("bad definition line"))?;
        let (name, _) = rest.split_once(':').ok_or(MockError::UnrecognizedPrompt("bad definition line"))?;
        if num != (n + 1).to_string() {
            return Err(MockError::UnrecognizedPrompt("definitions out of order"));
        }
        keys.push(normalize_key(name));
    }
    if keys.is_empty() {
        return Err(MockError::UnrecognizedPrompt("no code definitions"));
    }

    let mut records: Vec<(usize, String, Vec<u8>)> = Vec::new();
    for (n, line) in prompt[open + NARRATIVE_OPEN.len()..close].lines().enumerate() {
        let (num, rest) = line.split_once(". ").ok_or(MockError::UnrecognizedPrompt("bad narrative line"))?;
        if num != n.to_string() {
            return Err(MockError::UnrecognizedPrompt("narrative lines out of order"));
        }
        let text = strip_prior_labels(rest);
        let tokens = words(text);
        let values = keys
            .iter()
            .map(|k| u8::from(keywords(k).iter().any(|w| tokens.iter().any(|t| t == w))))
            .collect();
        records.push((n, text.to_string(), values));
    }

    Ok(ProviderResponse {
        content: records_json(&keys, records.iter().map(|(i, t, v)| (*i, t.as_str(), v.as_slice()))),
        finish_reason: Some("stop".to_string()),
        usage: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{default_codebook, Stage};
    use crate::corpus::NarrativeDocument;
    use crate::prompting::{parse_stage_response, render_system_prompt, render_user_prompt};
    use alloc::collections::BTreeMap;

    fn request(user_prompt: String) -> ProviderRequest {
        ProviderRequest {
            model_name: "mock".into(),
            system_prompt: render_system_prompt(1).unwrap().into(),
            user_prompt,
            params: BTreeMap::new(),
        }
    }

    #[test]
    fn stage_one_keyword_rules() {
        let cb = default_codebook();
        let doc = NarrativeDocument::from_text("d", "I decided to act. We must act now.").unwrap();
        let prompt = render_user_prompt(Stage::ONE, &doc, &cb, &[]).unwrap();
        let reply = mock_complete(&request(prompt)).unwrap();
        let out = parse_stage_response(&reply.content, Stage::ONE, &doc, &cb).unwrap();
        assert_eq!(out.records[0].values, [1, 0, 0]);
        assert_eq!(out.records[1].values, [0, 1, 1]);
    }

    #[test]
    fn free_form_prompt_rejected() {
        assert!(matches!(
            mock_complete(&request("Please annotate this story.".into())),
            Err(MockError::UnrecognizedPrompt(_))
        ));
    }

    #[test]
    fn strips_label_suffix_only_when_well_formed() {
        assert_eq!(strip_prior_labels("We sang! [self=0 us=1 now=0]"), "We sang!");
        assert_eq!(strip_prior_labels("See [note]"), "See [note]");
        assert_eq!(strip_prior_labels("Plain."), "Plain.");
    }
}
