use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "DMOS")]
    Dmos,
    SpeakerSimilarity,
    NativityPreference,
}

impl TestKind {
    /// True for the 1 to 5 opinion-score kinds.
    pub fn is_scale(self) -> bool {
        !matches!(self, TestKind::NativityPreference)
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Dmos => "DMOS",
            TestKind::SpeakerSimilarity => "SpeakerSimilarity",
            TestKind::NativityPreference => "NativityPreference",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StimulusRole {
    Synthesized,
    Natural,
    /// Played alongside similarity items, never rated.
    ReferenceSpeaker,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StimulusSpec {
    pub utterance_id: String,
    pub audio_path: PathBuf,
    pub role: StimulusRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SessionConfig {
    /// Assigned by the store when absent.
    #[serde(default)]
    pub id: Option<String>,
    pub kind: TestKind,
    pub stimuli: Vec<StimulusSpec>,
    #[serde(default = "one")]
    pub listener_count: u32,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Stimulus {
    pub id: String,
    pub utterance_id: String,
    pub audio_path: PathBuf,
    pub role: StimulusRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TestSession {
    pub id: String,
    pub kind: TestKind,
    pub stimuli: Vec<Stimulus>,
    pub listener_count: u32,
}

pub(crate) fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::InvalidConfig(msg.into()))
}

impl SessionConfig {
    /// Structural checks only; file existence is checked by [`TestSession::from_config`].
    pub fn validate(&self) -> Result<(), EvalError> {
        if let Some(id) = &self.id {
            if !valid_session_id(id) {
                return invalid(format!("session id `{id}` must be 1-64 characters of [A-Za-z0-9_-]"));
            }
        }
        if self.listener_count == 0 {
            return invalid("listenerCount must be at least 1");
        }
        let count = |role| self.stimuli.iter().filter(|s| s.role == role).count();
        let (synthesized, natural, reference) =
            (count(StimulusRole::Synthesized), count(StimulusRole::Natural), count(StimulusRole::ReferenceSpeaker));
        if synthesized + natural == 0 {
            return invalid("session has no stimuli to rate");
        }
        let mut seen = HashSet::new();
        for s in &self.stimuli {
            if s.utterance_id.trim().is_empty() {
                return invalid("stimulus with empty utteranceId");
            }
            if !seen.insert((&s.utterance_id, s.role)) {
                return invalid(format!("stimulus {} listed twice with the same role", s.utterance_id));
            }
        }
        match self.kind {
            TestKind::Dmos => {
                if synthesized == 0 || natural == 0 {
                    return invalid("DMOS sessions need both synthesized and natural stimuli");
                }
                if reference > 0 {
                    return invalid("DMOS sessions take no reference stimuli");
                }
            }
            TestKind::SpeakerSimilarity => {
                if reference == 0 {
                    return invalid("similarity sessions need a referenceSpeaker stimulus");
                }
            }
            TestKind::NativityPreference => {
                if reference > 0 {
                    return invalid("preference sessions take no reference stimuli");
                }
            }
        }
        for s in &self.stimuli {
            match (&s.option_labels, self.kind) {
                (Some(labels), TestKind::NativityPreference) => {
                    if labels.len() != 2 {
                        return invalid(format!("stimulus {} needs exactly two option labels, got {}", s.utterance_id, labels.len()));
                    }
                    if labels[0] == labels[1] || labels.iter().any(|l| l.trim().is_empty()) {
                        return invalid(format!("stimulus {} needs two distinct non-empty option labels", s.utterance_id));
                    }
                }
                (None, TestKind::NativityPreference) => {
                    return invalid(format!("stimulus {} needs exactly two option labels, got 0", s.utterance_id));
                }
                (Some(_), _) => return invalid(format!("option labels are only allowed in preference sessions ({})", s.utterance_id)),
                (None, _) => {}
            }
        }
        Ok(())
    }
}

impl TestSession {
    /// Validates `config`, checks every audio file exists and numbers the
    /// stimuli `{id}-000`, `{id}-001`, ... in config order.
    pub fn from_config(config: &SessionConfig, id: &str) -> Result<TestSession, EvalError> {
        config.validate()?;
        if !valid_session_id(id) {
            return invalid(format!("session id `{id}` must be 1-64 characters of [A-Za-z0-9_-]"));
        }
        if let Some(s) = config.stimuli.iter().find(|s| !s.audio_path.is_file()) {
            return Err(EvalError::MissingStimulus(s.audio_path.clone()));
        }
        let stimuli = config
            .stimuli
            .iter()
            .enumerate()
            .map(|(i, s)| Stimulus {
                id: format!("{id}-{i:03}"),
                utterance_id: s.utterance_id.clone(),
                audio_path: s.audio_path.clone(),
                role: s.role,
                option_labels: s.option_labels.clone(),
            })
            .collect();
        Ok(TestSession { id: id.to_string(), kind: config.kind, stimuli, listener_count: config.listener_count })
    }

    pub fn stimulus(&self, id: &str) -> Option<&Stimulus> {
        self.stimuli.iter().find(|s| s.id == id)
    }

    /// Stimuli a listener is asked to rate, in config order.
    pub fn rateable(&self) -> impl Iterator<Item = &Stimulus> {
        self.stimuli.iter().filter(|s| s.role != StimulusRole::ReferenceSpeaker)
    }

    pub fn references(&self) -> impl Iterator<Item = &Stimulus> {
        self.stimuli.iter().filter(|s| s.role == StimulusRole::ReferenceSpeaker)
    }

    /// Checks that `r` targets a rateable stimulus of this session and its
    /// value fits the session's scale.
    pub fn check_rating(&self, r: &RatingRecord) -> Result<&Stimulus, EvalError> {
        if r.session_id != self.id {
            return Err(EvalError::UnknownSession(r.session_id.clone()));
        }
        if r.listener_id.trim().is_empty() {
            return Err(EvalError::InvalidListener);
        }
        let stimulus = self.stimulus(&r.stimulus_id).ok_or_else(|| EvalError::UnknownStimulus {
            session: self.id.clone(),
            stimulus: r.stimulus_id.clone(),
        })?;
        if stimulus.role == StimulusRole::ReferenceSpeaker {
            return Err(EvalError::NotRateable(stimulus.id.clone()));
        }
        match (&r.value, self.kind.is_scale()) {
            (RatingValue::Score(v), true) if (1..=5).contains(v) => Ok(stimulus),
            (RatingValue::Score(v), true) => Err(EvalError::OutOfScale(format!("score {v} is outside 1-5"))),
            (RatingValue::Choice(c), true) => Err(EvalError::OutOfScale(format!("`{c}` is not a 1-5 score"))),
            (RatingValue::Choice(c), false) => {
                let labels = stimulus.option_labels.as_deref().unwrap_or_default();
                if labels.contains(c) {
                    Ok(stimulus)
                } else {
                    Err(EvalError::OutOfScale(format!("`{c}` is not one of {labels:?}")))
                }
            }
            (RatingValue::Score(v), false) => Err(EvalError::OutOfScale(format!("score {v} given where an option label is expected"))),
        }
    }
}

/// Presentation order of the rateable stimuli for one listener, as indices
/// into `session.stimuli`. Seeded by SHA-256 of the session and listener ids.
pub fn listener_order(session: &TestSession, listener_id: &str) -> Vec<usize> {
    let mut hasher = Sha256::new();
    hasher.update(session.id.as_bytes());
    hasher.update([0u8]);
    hasher.update(listener_id.as_bytes());
    let seed: [u8; 32] = hasher.finalize().into();
    let mut order: Vec<usize> = session
        .stimuli
        .iter()
        .enumerate()
        .filter(|(_, s)| s.role != StimulusRole::ReferenceSpeaker)
        .map(|(i, _)| i)
        .collect();
    order.shuffle(&mut ChaCha8Rng::from_seed(seed));
    order
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatingValue {
    Score(i64),
    Choice(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RatingRecord {
    pub session_id: String,
    pub listener_id: String,
    pub stimulus_id: String,
    pub value: RatingValue,
    /// Milliseconds since the Unix epoch; filled in by the store when zero.
    #[serde(default)]
    pub timestamp: u64,
}
