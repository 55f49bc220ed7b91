//! The three-stage chained prompting protocol: prompt rendering, reply
//! parsing, and a deterministic keyword-rule stand-in for a model.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::Stage;

mod mock;
mod parse;
mod render;
mod templates;

pub use mock::{mock_complete, MockError, MOCK_RULES};
pub use parse::{normalize_key, parse_stage_response, ParseError};
pub use render::{render_narrative, render_system_prompt, render_user_prompt, PromptError};

/// Name recorded for matrices produced by the chained protocol.
pub const PROMPT_VARIANT: &str = "cot-prompt-chaining";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub model_name: String,
    pub system_prompt: String,
    pub user_prompt: String,
    /// Sampling parameters passed through to the provider untouched.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderResponse {
    pub content: String,
    #[serde(default)]
    pub finish_reason: Option<String>,
    #[serde(default)]
    pub usage: Option<Usage>,
}

/// One request/response pair of a chain, kept verbatim for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub run_index: usize,
    pub stage: Stage,
    pub attempt: u32,
    pub request: ProviderRequest,
    #[serde(default)]
    pub response: Option<ProviderResponse>,
    /// Parse or transport error for this attempt, if any.
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub started_at: Option<String>,
    #[serde(default)]
    pub finished_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub index: usize,
    pub text: String,
    /// One 0/1 value per entry of [`StageOutput::codes`].
    pub values: Vec<u8>,
}

/// Parsed labels for one stage: one record per sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageOutput {
    pub stage: Stage,
    pub codes: Vec<String>,
    pub records: Vec<StageRecord>,
    pub raw_response: String,
}

impl StageOutput {
    pub fn value(&self, index: usize, code: &str) -> Option<u8> {
        let col = self.codes.iter().position(|c| c == code)?;
        self.records.get(index).map(|r| r.values[col])
    }

    /// Serializes the records as the JSON array the prompts ask for, with keys
    /// in code order.
    pub fn records_json(&self) -> String {
        records_json(&self.codes, self.records.iter().map(|r| (r.index, r.text.as_str(), r.values.as_slice())))
    }
}

pub(crate) fn records_json<'a>(
    keys: &[String],
    records: impl Iterator<Item = (usize, &'a str, &'a [u8])>,
) -> String {
    use core::fmt::Write;
    let mut out = String::from("[");
    for (n, (index, text, values)) in records.enumerate() {
        if n > 0 {
            out.push_str(",\n ");
        }
        let text = serde_json::to_string(text).expect("strings always serialize");
        let _ = write!(out, "{{\"index\": {index}, \"text\": {text}");
        for (key, v) in keys.iter().zip(values) {
            let key = serde_json::to_string(key).expect("strings always serialize");
            let _ = write!(out, ", {key}: {v}");
        }
        out.push('}');
    }
    out.push(']');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StageError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
