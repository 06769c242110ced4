//! Deterministic stand-in corpora for smoke tests and demos.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, Manifest, UtteranceRecord, TRANSCRIPT_FILE};
use crate::features::Audio;
use crate::Language;

pub const SAMPLE_RATE: u32 = 22050;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpeaker {
    pub id: String,
    pub language: Language,
    pub f0_hz: f64,
    /// Spectral-envelope peaks in Hz.
    pub formants: [f64; 3],
}

pub fn default_speakers() -> Vec<SyntheticSpeaker> {
    vec![
        SyntheticSpeaker { id: "spk-hi".into(), language: Language::Hindi, f0_hz: 120.0, formants: [650.0, 1100.0, 2600.0] },
        SyntheticSpeaker { id: "spk-bn".into(), language: Language::Bengali, f0_hz: 210.0, formants: [800.0, 1500.0, 2900.0] },
        SyntheticSpeaker { id: "spk-or".into(), language: Language::Odia, f0_hz: 165.0, formants: [500.0, 1800.0, 2500.0] },
    ]
}

fn vocabulary(language: Language) -> &'static [&'static str] {
    match language {
        Language::Hindi | Language::Rajasthani => &["कमल", "नमस्ते", "भारत", "पानी", "घर", "किताब", "सड़क", "बादल"],
        Language::Bengali => &["আমার", "বাংলা", "জল", "ভাষা", "মানুষ", "বই", "নদী", "আকাশ"],
        Language::Gujarati => &["કમળ", "ગુજરાત", "પાણી", "ઘર", "ભાષા", "માણસ"],
        Language::Odia => &["ଭାଷା", "ଘର", "ପାଣି", "ମଣିଷ", "ଆକାଶ", "ନଦୀ", "ବହି"],
        Language::Tamil => &["கடல்", "தமிழ்", "வீடு", "நீர்", "மனிதன்", "அடி"],
        Language::Telugu => &["తెలుగు", "నీరు", "ఇల్లు", "భాష", "మనిషి"],
        Language::Kannada => &["ಕನ್ನಡ", "ನೀರು", "ಮನೆ", "ಭಾಷೆ", "ಮನುಷ್ಯ"],
        Language::Malayalam => &["മലയാളം", "വെള്ളം", "വീട്", "ഭാഷ", "മനുഷ്യൻ"],
    }
}

fn sentence(language: Language, rng: &mut ChaCha8Rng) -> String {
    let words = vocabulary(language);
    let n = rng.random_range(2..=5);
    (0..n).map(|_| words[rng.random_range(0..words.len())]).collect::<Vec<_>>().join(" ")
}

/// One period of a harmonic source shaped by the speaker's formants.
fn period_table(speaker: &SyntheticSpeaker, len: usize) -> Vec<f64> {
    let n_harmonics = (4000.0 / speaker.f0_hz) as usize;
    let weights: Vec<f64> = (1..=n_harmonics)
        .map(|h| {
            let f = h as f64 * speaker.f0_hz;
            let envelope: f64 = speaker.formants.iter().map(|&fm| (-((f - fm) / 150.0).powi(2)).exp()).sum();
            (0.3 + envelope) / h as f64
        })
        .collect();
    let mut table: Vec<f64> = (0..len)
        .map(|i| {
            let phase = 2.0 * PI * i as f64 / len as f64;
            weights.iter().enumerate().map(|(h, w)| w * ((h + 1) as f64 * phase).sin()).sum()
        })
        .collect();
    let peak = table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    table.iter_mut().for_each(|v| *v /= peak);
    table
}

/// Voiced, syllable-modulated signal of `duration_sec` seconds.
pub fn synthesize_utterance(speaker: &SyntheticSpeaker, duration_sec: f64, seed: u64) -> Audio {
    const TABLE: usize = 1024;
    let table = period_table(speaker, TABLE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = f64::from(SAMPLE_RATE);
    let len = (duration_sec * sr).round() as usize;
    let syllable_rate = rng.random_range(3.0..5.0);
    let drift = rng.random_range(0.0..2.0 * PI);
    let mut phase = 0.0;
    let samples = (0..len)
        .map(|i| {
            let t = i as f64 / sr;
            let f0 = speaker.f0_hz * (1.0 + 0.08 * (2.0 * PI * 0.7 * t + drift).sin());
            phase = (phase + f0 / sr).fract();
            let pos = phase * TABLE as f64;
            let k = pos as usize;
            let frac = pos - k as f64;
            let voiced = table[k] * (1.0 - frac) + table[(k + 1) % TABLE] * frac;
            let envelope = 0.5 - 0.5 * (2.0 * PI * syllable_rate * t).cos();
            let fade = (t / 0.05).min((duration_sec - t) / 0.05).clamp(0.0, 1.0);
            fade * (0.3 * envelope * voiced + 0.002 * rng.random_range(-1.0..1.0))
        })
        .collect();
    Audio::new(samples, SAMPLE_RATE)
}

/// Data root written for one speaker.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeakerDir {
    pub speaker: String,
    pub language: Language,
    pub root: PathBuf,
}

/// Writes one data root per speaker under `out`, sharing `total_sec` of
/// audio evenly between the speakers.
pub fn write_corpus(out: impl AsRef<Path>, speakers: &[SyntheticSpeaker], total_sec: f64, seed: u64) -> Result<Vec<SpeakerDir>, CorpusError> {
    let out = out.as_ref();
    let per_speaker = total_sec / speakers.len() as f64;
    let mut dirs = Vec::new();
    for (s_idx, speaker) in speakers.iter().enumerate() {
        let root = out.join(format!("{}-{}", speaker.language, speaker.id));
        std::fs::create_dir_all(&root)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s_idx as u64 * 7919));
        let mut remaining = per_speaker;
        let mut tsv = String::new();
        let mut n = 0;
        while remaining > 1e-9 {
            let mut dur: f64 = rng.random_range(3.0..6.0);
            if remaining - dur < 1.0 {
                dur = remaining;
            }
            dur = (dur * f64::from(SAMPLE_RATE)).round() / f64::from(SAMPLE_RATE);
            let id = format!("{}_{:03}", speaker.id, n);
            synthesize_utterance(speaker, dur, rng.random()).write_wav(root.join(format!("{id}.wav")))?;
            tsv.push_str(&format!("{id}\t{}\n", sentence(speaker.language, &mut rng)));
            remaining -= dur;
            n += 1;
        }
        std::fs::write(root.join(TRANSCRIPT_FILE), tsv)?;
        dirs.push(SpeakerDir { speaker: speaker.id.clone(), language: speaker.language, root });
    }
    Ok(dirs)
}

/// Audio-free manifest of `hours` split into `utterance_sec` records, for
/// checking pooling arithmetic without writing files.
pub fn metadata_manifest(language: Language, speaker: &str, hours: f64, utterance_sec: f64) -> Manifest {
    let n = (hours * 3600.0 / utterance_sec).round() as usize;
    let records = (0..n)
        .map(|i| UtteranceRecord {
            id: format!("{language}-{speaker}-{i:05}"),
            language,
            family: language.family(),
            speaker: speaker.to_string(),
            script: language.script(),
            text: vocabulary(language)[i % vocabulary(language).len()].to_string(),
            audio_path: PathBuf::from(format!("{language}/{speaker}/{i:05}.wav")),
            duration_sec: utterance_sec,
            sample_rate: SAMPLE_RATE,
        })
        .collect();
    Manifest::from_records(records, vec![format!("metadata fixture: {hours} h of {language}")]).expect("generated ids are unique")
}
