//! Objective and subjective evaluation: batch MCD, listening-test sessions,
//! rating statistics and the synthesis scenario planner.

mod batch;
mod scenario;
mod session;
mod stats;
mod store;

pub use batch::{batch_mcd, McdParams, McdReport, McdRow};
pub use scenario::{plan_scenarios, ScenarioEntry, ScenarioLabel, ScenarioPlan, SpeakerRef};
pub use session::{
    listener_order, RatingRecord, RatingValue, SessionConfig, Stimulus, StimulusRole, StimulusSpec, TestKind, TestSession,
};
pub use stats::{
    aggregate_means, compute_dmos, compute_preference, compute_results, compute_similarity_score, round2, Aggregate,
    AggregateInput, DmosSummary, MeanSummary, PreferenceSummary, SessionResults, StimulusMean,
};
pub use store::{EvalStore, NextStimulus, RATINGS_LOG, SESSIONS_LOG};

use std::path::PathBuf;

use crate::features::FeatureError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("stimulus audio {0} not found")]
    MissingStimulus(PathBuf),
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("stimulus {stimulus} is not part of session {session}")]
    UnknownStimulus { session: String, stimulus: String },
    #[error("listener {listener} already rated {stimulus}")]
    DuplicateRating { listener: String, stimulus: String },
    #[error("rating out of scale: {0}")]
    OutOfScale(String),
    #[error("stimulus {0} is a reference and cannot be rated")]
    NotRateable(String),
    #[error("listener id must be non-empty")]
    InvalidListener,
    #[error("session {0} has no ratings to summarise")]
    NoRatings(String),
    #[error("session {session} is {found}, expected {expected}")]
    WrongKind { session: String, expected: TestKind, found: TestKind },
    #[error("no file names are shared between the reference and synthesized directories")]
    NoPairs,
    #[error("{path}, line {line}: {reason}")]
    CorruptLog { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
