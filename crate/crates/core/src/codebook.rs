//! The coding scheme: codes, their groups, and the prompt stage each group
//! belongs to.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod defaults;

/// Version tag of the built-in 14-code scheme.
pub const DEFAULT_VERSION: &str = "pn14-final";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodebookError {
    #[error("codebook has no codes")]
    NoCodes,
    #[error("code id must be non-empty")]
    EmptyId,
    #[error("code id {0:?} must be lowercase without whitespace")]
    InvalidId(String),
    #[error("duplicate code id {0:?}")]
    DuplicateId(String),
    #[error("code {0:?} has an empty definition")]
    EmptyDefinition(String),
    #[error("code {0:?} has an empty display name")]
    EmptyName(String),
    #[error("unknown code group {0:?} (expected categorical, structural or content)")]
    UnknownGroup(String),
    #[error("no codes assigned to the {0} group")]
    EmptyGroup(CodeGroup),
    #[error("invalid stage {0} (expected 1, 2 or 3)")]
    InvalidStage(u8),
}

/// One of the three coding types. Each is annotated by its own prompt stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeGroup {
    Categorical,
    Structural,
    Content,
}

impl CodeGroup {
    pub const ALL: [CodeGroup; 3] = [CodeGroup::Categorical, CodeGroup::Structural, CodeGroup::Content];

    pub fn stage(self) -> Stage {
        match self {
            CodeGroup::Categorical => Stage::ONE,
            CodeGroup::Structural => Stage::TWO,
            CodeGroup::Content => Stage::THREE,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CodeGroup::Categorical => "categorical",
            CodeGroup::Structural => "structural",
            CodeGroup::Content => "content",
        }
    }

    /// Heading used for this group's definition block in prompts.
    pub fn prompt_heading(self) -> &'static str {
        match self {
            CodeGroup::Categorical => "CATEGORICAL CODES",
            CodeGroup::Structural => "STRUCTURAL CODES",
            CodeGroup::Content => "CONTENT CODES",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CodebookError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "categorical" => Ok(CodeGroup::Categorical),
            "structural" => Ok(CodeGroup::Structural),
            "content" => Ok(CodeGroup::Content),
            _ => Err(CodebookError::UnknownGroup(s.to_string())),
        }
    }
}

impl fmt::Display for CodeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A prompt stage in the chain, always 1, 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Stage(u8);

impl Stage {
    pub const ONE: Stage = Stage(1);
    pub const TWO: Stage = Stage(2);
    pub const THREE: Stage = Stage(3);
    pub const ALL: [Stage; 3] = [Stage::ONE, Stage::TWO, Stage::THREE];

    pub fn new(stage: u8) -> Result<Self, CodebookError> {
        match stage {
            1..=3 => Ok(Stage(stage)),
            other => Err(CodebookError::InvalidStage(other)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn group(self) -> CodeGroup {
        match self.0 {
            1 => CodeGroup::Categorical,
            2 => CodeGroup::Structural,
            _ => CodeGroup::Content,
        }
    }

    /// Stages that run before this one.
    pub fn earlier(self) -> impl Iterator<Item = Stage> {
        (1..self.0).map(Stage)
    }
}

impl TryFrom<u8> for Stage {
    type Error = CodebookError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Stage::new(value)
    }
}

impl From<Stage> for u8 {
    fn from(stage: Stage) -> u8 {
        stage.0
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Code {
    pub id: String,
    #[serde(rename = "name")]
    pub display_name: String,
    pub group: CodeGroup,
    /// Definition text injected verbatim into the stage prompt.
    pub definition: String,
}

/// Unvalidated codebook as it appears in a codebook file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub version: String,
    pub codes: Vec<CodeEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeEntry {
    pub id: String,
    pub name: String,
    pub group: String,
    pub definition: String,
}

/// An ordered, validated list of codes. Code order fixes matrix column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodebookFile", into = "CodebookFile")]
pub struct Codebook {
    version: String,
    codes: Vec<Code>,
}

impl Codebook {
    pub fn new(version: impl Into<String>, codes: Vec<Code>) -> Result<Self, CodebookError> {
        if codes.is_empty() {
            return Err(CodebookError::NoCodes);
        }
        for (i, code) in codes.iter().enumerate() {
            if code.id.is_empty() {
                return Err(CodebookError::EmptyId);
            }
            if code.id.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
                return Err(CodebookError::InvalidId(code.id.clone()));
            }
            if codes[..i].iter().any(|c| c.id == code.id) {
                return Err(CodebookError::DuplicateId(code.id.clone()));
            }
            if code.display_name.trim().is_empty() {
                return Err(CodebookError::EmptyName(code.id.clone()));
            }
            if code.definition.trim().is_empty() {
                return Err(CodebookError::EmptyDefinition(code.id.clone()));
            }
        }
        for group in CodeGroup::ALL {
            if !codes.iter().any(|c| c.group == group) {
                return Err(CodebookError::EmptyGroup(group));
            }
        }
        Ok(Codebook { version: version.into(), codes })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn codes(&self) -> &[Code] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.codes.iter().map(|c| c.id.as_str())
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.codes.iter().position(|c| c.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&Code> {
        self.codes.iter().find(|c| c.id == id)
    }

    /// Codes annotated at `stage`, in codebook order.
    pub fn codes_for_stage(&self, stage: Stage) -> Vec<&Code> {
        let group = stage.group();
        self.codes.iter().filter(|c| c.group == group).collect()
    }

    /// Column positions of the codes annotated at `stage`.
    pub fn columns_for_stage(&self, stage: Stage) -> Vec<usize> {
        let group = stage.group();
        self.codes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.group == group)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Looks up the codes of a stage given as a raw number.
pub fn codes_for_stage(cb: &Codebook, stage: u8) -> Result<Vec<&Code>, CodebookError> {
    Ok(cb.codes_for_stage(Stage::new(stage)?))
}

impl TryFrom<CodebookFile> for Codebook {
    type Error = CodebookError;

    fn try_from(file: CodebookFile) -> Result<Self, Self::Error> {
        let codes = file
            .codes
            .into_iter()
            .map(|e| {
                Ok(Code {
                    group: CodeGroup::parse(&e.group)?,
                    id: e.id,
                    display_name: e.name,
                    definition: e.definition,
                })
            })
            .collect::<Result<Vec<_>, CodebookError>>()?;
        Codebook::new(file.version, codes)
    }
}

impl From<Codebook> for CodebookFile {
    fn from(cb: Codebook) -> Self {
        CodebookFile {
            version: cb.version,
            codes: cb
                .codes
                .into_iter()
                .map(|c| CodeEntry {
                    id: c.id,
                    name: c.display_name,
                    group: c.group.as_str().to_string(),
                    definition: c.definition,
                })
                .collect(),
        }
    }
}

/// The final 14-code scheme: 3 categorical, 3 structural and 8 content codes,
/// with the definitions used in the annotation prompts.
pub fn default_codebook() -> Codebook {
    let codes = defaults::DEFAULT_CODES
        .iter()
        .map(|&(id, name, group, definition)| Code {
            id: id.to_string(),
            display_name: name.to_string(),
            group,
            definition: definition.to_string(),
        })
        .collect();
    Codebook::new(DEFAULT_VERSION, codes).expect("built-in codebook is valid")
}
