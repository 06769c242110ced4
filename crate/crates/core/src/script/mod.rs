//! Script-independent text representations for the eight Indic scripts:
//! MLCM character tokens and common-label-set phone sequences.

mod block;
pub mod cls;
pub mod mlcm;

pub use block::ScriptBlock;
pub use cls::{parse_to_cls, parse_to_cls_with, ParseOptions, PhoneClass, PhoneInventory, PhoneSequence};
pub use mlcm::{
    detect_script, normalize, render_from_mlcm, to_mlcm, Category, CommonToken, Label, MlcmSequence,
    MlcmTable,
};

use crate::lang::Language;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("text is empty after removing whitespace and punctuation")]
    EmptyText,
    #[error("text contains no codepoint from a supported Indic script")]
    NoIndicContent,
    #[error("text mixes {first} and {second} codepoints")]
    MixedScript { first: ScriptBlock, second: ScriptBlock },
    #[error("{language} is written in {expected}, but the text is {found}")]
    ScriptMismatch {
        language: Language,
        expected: ScriptBlock,
        found: ScriptBlock,
    },
    #[error("U+{:04X} is a {script} codepoint outside the common inventory", *codepoint as u32)]
    UnmappableCodepoint { codepoint: char, script: ScriptBlock },
    #[error("non-Indic character {0:?}")]
    ForeignCharacter(char),
    #[error("token {label} has no {target} form")]
    UnrenderableToken { label: Label, target: ScriptBlock },
    #[error("sign {label} does not follow a consonant or vowel")]
    OrphanSign { label: Label },
    #[error("digits must be expanded to words before phone parsing")]
    UnexpandedDigit,
    #[error("table line {line}: {message}")]
    Table { line: usize, message: String },
}
