use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Compliance outcome of a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Permitted,
    Prohibited,
    NotApplicable,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Permitted, Label::Prohibited, Label::NotApplicable];

    pub fn index(self) -> usize {
        match self {
            Label::Permitted => 0,
            Label::Prohibited => 1,
            Label::NotApplicable => 2,
        }
    }

    /// Safety-conservative outcome precedence used when several outcomes are
    /// reached at once: Prohibited > Permitted > NotApplicable.
    pub fn outcome_rank(self) -> u8 {
        match self {
            Label::Prohibited => 2,
            Label::Permitted => 1,
            Label::NotApplicable => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Permitted => "permitted",
            Label::Prohibited => "prohibited",
            Label::NotApplicable => "not_applicable",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    /// Accepts the canonical names plus the spellings used by common
    /// benchmark exports (`permit`, `Not Applicable`, `not related`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c })
            .collect();
        match norm.as_str() {
            "permitted" | "permit" | "permissible" | "allowed" => Ok(Label::Permitted),
            "prohibited" | "prohibit" | "forbidden" | "violation" => Ok(Label::Prohibited),
            "not_applicable" | "notapplicable" | "n/a" | "not_related" | "unrelated" | "inapplicable" => {
                Ok(Label::NotApplicable)
            }
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// Regulation a case is assessed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Gdpr,
    AiAct,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Gdpr => "gdpr",
            Domain::AiAct => "aiact",
        }
    }

    /// Name used inside prompts.
    pub fn display_name(self) -> &'static str {
        match self {
            Domain::Gdpr => "GDPR",
            Domain::AiAct => "EU AI Act",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown domain {0:?} (expected gdpr or aiact)")]
pub struct UnknownDomain(pub String);

impl FromStr for Domain {
    type Err = UnknownDomain;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String =
            s.trim().to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match norm.as_str() {
            "gdpr" => Ok(Domain::Gdpr),
            "aiact" | "euaiact" => Ok(Domain::AiAct),
            _ => Err(UnknownDomain(s.to_string())),
        }
    }
}
