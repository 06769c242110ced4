//! Languages, language families and their writing systems.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::script::ScriptBlock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    IndoAryan,
    Dravidian,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::IndoAryan => "IndoAryan",
            Family::Dravidian => "Dravidian",
        })
    }
}

impl FromStr for Family {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "indoaryan" => Ok(Family::IndoAryan),
            "dravidian" => Ok(Family::Dravidian),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

/// The nine languages the pipeline knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Bengali,
    Gujarati,
    Hindi,
    Odia,
    Rajasthani,
    Kannada,
    Malayalam,
    Tamil,
    Telugu,
}

impl Language {
    pub const ALL: [Language; 9] = [
        Language::Bengali,
        Language::Gujarati,
        Language::Hindi,
        Language::Odia,
        Language::Rajasthani,
        Language::Kannada,
        Language::Malayalam,
        Language::Tamil,
        Language::Telugu,
    ];

    pub fn family(self) -> Family {
        match self {
            Language::Bengali
            | Language::Gujarati
            | Language::Hindi
            | Language::Odia
            | Language::Rajasthani => Family::IndoAryan,
            Language::Kannada | Language::Malayalam | Language::Tamil | Language::Telugu => {
                Family::Dravidian
            }
        }
    }

    /// Hindi and Rajasthani share Devanagari, which is why the language is
    /// always passed explicitly and never inferred from text.
    pub fn script(self) -> ScriptBlock {
        match self {
            Language::Hindi | Language::Rajasthani => ScriptBlock::Devanagari,
            Language::Bengali => ScriptBlock::Bengali,
            Language::Gujarati => ScriptBlock::Gujarati,
            Language::Odia => ScriptBlock::Odia,
            Language::Tamil => ScriptBlock::Tamil,
            Language::Telugu => ScriptBlock::Telugu,
            Language::Kannada => ScriptBlock::Kannada,
            Language::Malayalam => ScriptBlock::Malayalam,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Language::Bengali => "bengali",
            Language::Gujarati => "gujarati",
            Language::Hindi => "hindi",
            Language::Odia => "odia",
            Language::Rajasthani => "rajasthani",
            Language::Kannada => "kannada",
            Language::Malayalam => "malayalam",
            Language::Tamil => "tamil",
            Language::Telugu => "telugu",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Language {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Language::ALL
            .into_iter()
            .find(|l| l.name() == lower)
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_table() {
        let aryan: Vec<_> = Language::ALL
            .into_iter()
            .filter(|l| l.family() == Family::IndoAryan)
            .collect();
        assert_eq!(
            aryan,
            [
                Language::Bengali,
                Language::Gujarati,
                Language::Hindi,
                Language::Odia,
                Language::Rajasthani
            ]
        );
    }

    #[test]
    fn nine_languages_eight_scripts() {
        let mut scripts: Vec<_> = Language::ALL.iter().map(|l| l.script()).collect();
        scripts.sort();
        scripts.dedup();
        assert_eq!(scripts.len(), 8);
    }

    #[test]
    fn parse_names() {
        assert_eq!("Hindi".parse::<Language>().unwrap(), Language::Hindi);
        assert_eq!("indo-aryan".parse::<Family>().unwrap(), Family::IndoAryan);
        assert!("english".parse::<Language>().is_err());
    }
}
