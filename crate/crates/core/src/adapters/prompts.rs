//! Canonical prompt assets and placeholder rendering.
//!
//! The five assets under `assets/prompts/` are checked in verbatim and pinned
//! by SHA-256; a test fails if any byte changes. `repair_reminder.txt` is
//! workbench-authored glue, not one of the canonical prompts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("unknown prompt asset {0:?}")]
    UnknownAsset(String),
    #[error("missing binding for placeholder {{{{{0}}}}}")]
    MissingPlaceholder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptId {
    System,
    Baseline,
    Guidelines,
    StudentPersona,
    Integration,
}

impl PromptId {
    pub const ALL: [PromptId; 5] = [Self::System, Self::Baseline, Self::Guidelines, Self::StudentPersona, Self::Integration];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::System => "system",
            Self::Baseline => "baseline",
            Self::Guidelines => "guidelines",
            Self::StudentPersona => "student_persona",
            Self::Integration => "integration",
        }
    }
}

impl std::str::FromStr for PromptId {
    type Err = PromptError;
    fn from_str(s: &str) -> Result<Self, PromptError> {
        Self::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| PromptError::UnknownAsset(s.to_string()))
    }
}

const SYSTEM: &str = include_str!("../../assets/prompts/system.txt");
const BASELINE: &str = include_str!("../../assets/prompts/baseline.txt");
const GUIDELINES: &str = include_str!("../../assets/prompts/guidelines.txt");
const STUDENT_PERSONA: &str = include_str!("../../assets/prompts/student_persona.txt");
const INTEGRATION: &str = include_str!("../../assets/prompts/integration.txt");
const REPAIR_REMINDER: &str = include_str!("../../assets/prompts/repair_reminder.txt");

/// Marker under which the guidelines are injected into the baseline prompt.
pub const GUIDELINES_MARKER: &str = "##Adaptation guidelines##";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptAsset {
    pub id: PromptId,
    /// Verbatim asset text (without the trailing newline of the file).
    pub text: &'static str,
    /// SHA-256 of the asset file.
    pub sha256: &'static str,
    pub required_placeholders: &'static [&'static str],
}

impl PromptAsset {
    pub fn get(id: PromptId) -> Self {
        let (file, sha256, required_placeholders): (&'static str, &'static str, &'static [&'static str]) = match id {
            PromptId::System => (SYSTEM, "a32a78ffdc5983a29bf6c49219751950b517ff2688b87846c04a9e2c83b62f85", &[]),
            PromptId::Baseline => (BASELINE, "338c2057c2acb21773db6e445fc11c7074522a6f99f5f66131b791c10dd8305b", &["guidelines"]),
            PromptId::Guidelines => (GUIDELINES, "8c299badf5ecdf3923abd46255a6882e091fc4a07e8c6b91a8e29f5e46170967", &[]),
            PromptId::StudentPersona => (STUDENT_PERSONA, "5bc35afe93402135ca8e53e77e3758e9f1e9ac83b51877822cd3b061b6060b29", &[]),
            PromptId::Integration => (INTEGRATION, "936e61d2f0441ca0b1efcdf6995e5a3c1c74453fcff3e14703a680aaf36f5738", &[]),
        };
        Self { id, text: file.trim_end_matches('\n'), sha256, required_placeholders }
    }

    /// Hash of the embedded file bytes; equals `sha256` unless the asset drifted.
    pub fn computed_sha256(&self) -> String {
        let file = match self.id {
            PromptId::System => SYSTEM,
            PromptId::Baseline => BASELINE,
            PromptId::Guidelines => GUIDELINES,
            PromptId::StudentPersona => STUDENT_PERSONA,
            PromptId::Integration => INTEGRATION,
        };
        hex::encode(Sha256::digest(file.as_bytes()))
    }

    fn template(&self) -> String {
        match self.id {
            PromptId::Baseline => format!("{}\n\n{GUIDELINES_MARKER}\n\n{{{{guidelines}}}}", self.text),
            _ => self.text.to_string(),
        }
    }
}

/// Asset hashes keyed by id, for run manifests.
pub fn asset_hashes() -> BTreeMap<&'static str, &'static str> {
    PromptId::ALL.into_iter().map(|id| (id.as_str(), PromptAsset::get(id).sha256)).collect()
}

/// Substitute `{{name}}` placeholders. Every required placeholder must be bound.
pub fn render_prompt(id: PromptId, bindings: &BTreeMap<&str, &str>) -> Result<String, PromptError> {
    let asset = PromptAsset::get(id);
    for name in asset.required_placeholders {
        if !bindings.contains_key(name) {
            return Err(PromptError::MissingPlaceholder(name.to_string()));
        }
    }
    Ok(substitute(&asset.template(), bindings))
}

fn substitute(template: &str, bindings: &BTreeMap<&str, &str>) -> String {
    let mut out = template.to_string();
    for (name, value) in bindings {
        out = out.replace(&format!("{{{{{name}}}}}", name = name), value);
    }
    out
}

/// Baseline prompt with the guidelines injected.
pub fn baseline_prompt() -> String {
    let guidelines = PromptAsset::get(PromptId::Guidelines).text;
    render_prompt(PromptId::Baseline, &BTreeMap::from([("guidelines", guidelines)])).expect("guidelines bound")
}

/// Corrective follow-up sent after an unusable reply.
pub fn repair_reminder(problem: &str, expected: usize) -> String {
    let expected = expected.to_string();
    substitute(
        REPAIR_REMINDER.trim_end_matches('\n'),
        &BTreeMap::from([("problem", problem), ("expected", expected.as_str())]),
    )
}
