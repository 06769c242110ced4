use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Language;

/// A voice, identified by id, with the language it natively speaks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpeakerRef {
    pub id: String,
    pub language: Language,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioLabel {
    /// Seen language, seen native speaker.
    #[serde(rename = "a")]
    A,
    /// Seen language, seen speaker of another language.
    #[serde(rename = "b")]
    B,
    /// Seen language, unseen speaker.
    #[serde(rename = "c")]
    C,
    /// Unseen language, unseen speaker.
    #[serde(rename = "d")]
    D,
    /// Unseen language, seen speaker.
    #[serde(rename = "e")]
    E,
}

impl ScenarioLabel {
    pub fn classify(language_seen: bool, speaker_seen: bool, switching: bool) -> ScenarioLabel {
        match (language_seen, speaker_seen, switching) {
            (true, true, false) => ScenarioLabel::A,
            (true, true, true) => ScenarioLabel::B,
            (true, false, _) => ScenarioLabel::C,
            (false, false, _) => ScenarioLabel::D,
            (false, true, _) => ScenarioLabel::E,
        }
    }
}

impl fmt::Display for ScenarioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioLabel::A => "a",
            ScenarioLabel::B => "b",
            ScenarioLabel::C => "c",
            ScenarioLabel::D => "d",
            ScenarioLabel::E => "e",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioEntry {
    pub text_language: Language,
    pub speaker: SpeakerRef,
    pub language_seen: bool,
    pub speaker_seen: bool,
    /// Speaker's native language differs from the text language.
    pub switching: bool,
    pub label: ScenarioLabel,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioPlan {
    pub entries: Vec<ScenarioEntry>,
}

/// Labels every (text language, target speaker) pair. A speaker counts as
/// seen when its id appears in `seen_speakers`.
pub fn plan_scenarios(
    seen_languages: &[Language],
    seen_speakers: &[SpeakerRef],
    target_languages: &[Language],
    target_speakers: &[SpeakerRef],
) -> ScenarioPlan {
    let mut entries = Vec::with_capacity(target_languages.len() * target_speakers.len());
    for &text_language in target_languages {
        for speaker in target_speakers {
            let language_seen = seen_languages.contains(&text_language);
            let speaker_seen = seen_speakers.iter().any(|s| s.id == speaker.id);
            let switching = speaker.language != text_language;
            entries.push(ScenarioEntry {
                text_language,
                speaker: speaker.clone(),
                language_seen,
                speaker_seen,
                switching,
                label: ScenarioLabel::classify(language_seen, speaker_seen, switching),
            });
        }
    }
    ScenarioPlan { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spk(id: &str, language: Language) -> SpeakerRef {
        SpeakerRef { id: id.into(), language }
    }

    #[test]
    fn switching_to_bengali_voice_is_b() {
        let seen = [spk("hi-f", Language::Hindi), spk("bn-f", Language::Bengali)];
        let plan = plan_scenarios(&[Language::Hindi, Language::Bengali], &seen, &[Language::Hindi], &seen);
        let labels: Vec<_> = plan.entries.iter().map(|e| e.label).collect();
        assert_eq!(labels, [ScenarioLabel::A, ScenarioLabel::B]);
    }

    #[test]
    fn every_flag_combination_has_one_label() {
        let mut labels = Vec::new();
        for l in [false, true] {
            for s in [false, true] {
                for w in [false, true] {
                    labels.push(ScenarioLabel::classify(l, s, w));
                }
            }
        }
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 5);
    }

    #[test]
    fn labels_serialize_lowercase() {
        assert_eq!(serde_json::to_string(&ScenarioLabel::E).unwrap(), "\"e\"");
    }
}
