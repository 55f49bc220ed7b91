use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::templates::{STAGE1_INSTRUCTIONS, STAGE2_INSTRUCTIONS, STAGE3_INSTRUCTIONS, SYSTEM_PROMPT};
use super::StageOutput;
use crate::codebook::{Codebook, CodebookError, Stage};
use crate::corpus::NarrativeDocument;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("invalid stage {0} (expected 1, 2 or 3)")]
    InvalidStage(u8),
    #[error("stage {stage} needs the annotations of stage {missing}")]
    MissingPrior { stage: Stage, missing: Stage },
    #[error("stage 1 takes no prior annotations")]
    UnexpectedPrior,
    #[error("prior annotations of stage {stage} do not cover the narrative")]
    PriorMismatch { stage: Stage },
}

impl From<CodebookError> for PromptError {
    fn from(e: CodebookError) -> Self {
        match e {
            CodebookError::InvalidStage(s) => PromptError::InvalidStage(s),
            _ => PromptError::InvalidStage(0),
        }
    }
}

/// The system prompt. All three stages share it.
pub fn render_system_prompt(stage: u8) -> Result<&'static str, PromptError> {
    Stage::new(stage)?;
    Ok(SYSTEM_PROMPT)
}

fn instructions(stage: Stage) -> &'static str {
    match stage.get() {
        1 => STAGE1_INSTRUCTIONS,
        2 => STAGE2_INSTRUCTIONS,
        _ => STAGE3_INSTRUCTIONS,
    }
}

/// Lists the sentences as `<index>. <text>`, one per line. When `prior` is
/// non-empty each line ends with ` [code=v ...]` holding the earlier stages'
/// labels in stage order.
pub fn render_narrative(doc: &NarrativeDocument, prior: &[&StageOutput]) -> String {
    let mut out = String::new();
    for (i, s) in doc.sentences().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{}. {}", s.index, s.text));
        if !prior.is_empty() {
            let labels: Vec<String> = prior
                .iter()
                .flat_map(|p| p.codes.iter().zip(&p.records[i].values).map(|(c, v)| format!("{c}={v}")))
                .collect();
            out.push_str(" [");
            out.push_str(&labels.join(" "));
            out.push(']');
        }
    }
    out
}

/// Renders the user prompt of `stage`: the stage's code definitions, the
/// narrative (annotated with earlier stages' labels for stages 2 and 3) and
/// the output instructions.
pub fn render_user_prompt(
    stage: Stage,
    doc: &NarrativeDocument,
    cb: &Codebook,
    prior: &[StageOutput],
) -> Result<String, PromptError> {
    if stage == Stage::ONE && !prior.is_empty() {
        return Err(PromptError::UnexpectedPrior);
    }
    let mut ordered = Vec::new();
    for earlier in stage.earlier() {
        let p = prior
            .iter()
            .find(|p| p.stage == earlier)
            .ok_or(PromptError::MissingPrior { stage, missing: earlier })?;
        if p.records.len() != doc.len() || p.records.iter().any(|r| r.values.len() != p.codes.len()) {
            return Err(PromptError::PriorMismatch { stage: earlier });
        }
        ordered.push(p);
    }

    let definitions: Vec<String> = cb
        .codes_for_stage(stage)
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{}. {}: {}", i + 1, c.display_name, c.definition))
        .collect();
    Ok(format!(
        "**{}**:\n{}\n\n**Public Narrative:**\n{}\n\n**Output Instructions**\n{}",
        stage.group().prompt_heading(),
        definitions.join("\n"),
        render_narrative(doc, &ordered),
        instructions(stage),
    ))
}
