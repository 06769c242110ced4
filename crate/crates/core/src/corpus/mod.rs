//! Utterance manifests: building, cleaning, filtering, pooling and
//! adaptation-subset selection.

mod clean;
mod manifest;
mod subset;
pub mod synthetic;

pub use clean::clean_text;
pub use manifest::{build_manifest, build_manifest_with, BuildOptions, Manifest, UtteranceRecord, TRANSCRIPT_FILE};
pub use subset::{filter_manifest, pool, select_adaptation_subset, DEFAULT_MAX_DURATION_SEC};

use std::path::PathBuf;

use crate::{Family, Language};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("utterance {id}: audio file {path} not found")]
    MissingAudio { id: String, path: PathBuf },
    #[error("cannot read wav header of {path}: {reason}")]
    UnreadableHeader { path: PathBuf, reason: String },
    #[error("transcript line {line}: {reason}")]
    TranscriptMismatch { line: usize, reason: String },
    #[error("{path}: header says {header_sec:.4} s but decoded audio is {decoded_sec:.4} s")]
    DurationMismatch { path: PathBuf, header_sec: f64, decoded_sec: f64 },
    #[error("text is empty after cleaning")]
    EmptyAfterCleaning,
    #[error("record {id} is {found}, pool is restricted to {expected}")]
    CrossFamilyPooling { id: String, expected: Family, found: Family },
    #[error("duplicate utterance id {0}")]
    DuplicateId(String),
    #[error("manifest mixes {what}; pooling expects one language and one speaker per input")]
    MixedManifest { what: String },
    #[error("need {target_sec:.1} s of audio, only {available_sec:.1} s available")]
    InsufficientData { available_sec: f64, target_sec: f64 },
    #[error("invalid record {id}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("manifest line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("no manifests to pool")]
    NothingToPool,
    #[error(transparent)]
    Audio(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check_language_family(id: &str, language: Language, family: Family) -> Result<(), CorpusError> {
    if language.family() != family {
        return Err(CorpusError::InvalidRecord {
            id: id.to_string(),
            reason: format!("{language} belongs to {}, record says {family}", language.family()),
        });
    }
    Ok(())
}
