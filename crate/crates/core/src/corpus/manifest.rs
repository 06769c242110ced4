use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_language_family, clean_text, CorpusError};
use crate::script::{detect_script, ScriptBlock};
use crate::{Family, Language};

/// Transcript index inside a data root: `utterance-id<TAB>text` per line.
pub const TRANSCRIPT_FILE: &str = "transcripts.tsv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UtteranceRecord {
    pub id: String,
    pub language: Language,
    pub family: Family,
    pub speaker: String,
    pub script: ScriptBlock,
    pub text: String,
    pub audio_path: PathBuf,
    pub duration_sec: f64,
    pub sample_rate: u32,
}

impl UtteranceRecord {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |reason: String| CorpusError::InvalidRecord { id: self.id.clone(), reason };
        if !(self.duration_sec > 0.0 && self.duration_sec.is_finite()) {
            return Err(invalid(format!("duration {} s must be positive", self.duration_sec)));
        }
        if self.sample_rate == 0 {
            return Err(invalid("sample rate must be positive".into()));
        }
        if self.script != self.language.script() {
            return Err(invalid(format!("{} is written in {}, not {}", self.language, self.language.script(), self.script)));
        }
        check_language_family(&self.id, self.language, self.family)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub records: Vec<UtteranceRecord>,
    pub provenance: Vec<String>,
    pub total_duration_sec: f64,
}

impl Manifest {
    /// Builds a manifest, rejecting duplicate ids and invalid records.
    pub fn from_records(records: Vec<UtteranceRecord>, provenance: Vec<String>) -> Result<Manifest, CorpusError> {
        let mut seen = HashSet::new();
        for r in &records {
            r.validate()?;
            if !seen.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId(r.id.clone()));
            }
        }
        let total_duration_sec = records.iter().map(|r| r.duration_sec).sum();
        Ok(Manifest { records, provenance, total_duration_sec })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialise"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(src: &str, origin: &str) -> Result<Manifest, CorpusError> {
        let mut records = Vec::new();
        for (i, line) in src.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(line).map_err(|source| CorpusError::Json { line: i + 1, source })?);
        }
        Manifest::from_records(records, vec![format!("loaded {origin}")])
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_jsonl().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Manifest, CorpusError> {
        let path = path.as_ref();
        Manifest::from_jsonl(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Decode every file and check the header duration to within 1 ms.
    pub verify: bool,
}

pub fn build_manifest(data_root: impl AsRef<Path>, language: Language, speaker: &str) -> Result<Manifest, CorpusError> {
    build_manifest_with(data_root, language, speaker, BuildOptions::default())
}

struct TranscriptLine {
    line: usize,
    id: String,
    text: String,
}

fn read_transcripts(path: &Path, language: Language) -> Result<Vec<TranscriptLine>, CorpusError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mismatch = |reason: String| CorpusError::TranscriptMismatch { line: n, reason };
        let (id, raw) = line.split_once('\t').ok_or_else(|| mismatch("expected `id<TAB>text`".into()))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(mismatch("empty utterance id".into()));
        }
        if !seen.insert(id.to_string()) {
            return Err(mismatch(format!("utterance id {id} repeated")));
        }
        let text = clean_text(raw).map_err(|_| mismatch(format!("{id}: text is empty after cleaning")))?;
        match detect_script(&text) {
            Ok(s) if s == language.script() => {}
            Ok(s) => return Err(mismatch(format!("{id}: text is {s}, {language} uses {}", language.script()))),
            Err(e) => return Err(mismatch(format!("{id}: {e}"))),
        }
        out.push(TranscriptLine { line: n, id: id.to_string(), text });
    }
    Ok(out)
}

fn header_duration(path: &Path, verify: bool) -> Result<(f64, u32), CorpusError> {
    let unreadable = |e: hound::Error| CorpusError::UnreadableHeader { path: path.to_path_buf(), reason: e.to_string() };
    let mut reader = hound::WavReader::open(path).map_err(unreadable)?;
    let spec = reader.spec();
    if spec.sample_rate == 0 {
        return Err(CorpusError::UnreadableHeader { path: path.to_path_buf(), reason: "zero sample rate".into() });
    }
    let header_sec = f64::from(reader.duration()) / f64::from(spec.sample_rate);
    if verify {
        let mut decoded = 0u64;
        match spec.sample_format {
            hound::SampleFormat::Int => {
                for s in reader.samples::<i32>() {
                    s.map_err(unreadable)?;
                    decoded += 1;
                }
            }
            hound::SampleFormat::Float => {
                for s in reader.samples::<f32>() {
                    s.map_err(unreadable)?;
                    decoded += 1;
                }
            }
        }
        let decoded_sec = decoded as f64 / f64::from(spec.channels) / f64::from(spec.sample_rate);
        if (decoded_sec - header_sec).abs() > 1e-3 {
            return Err(CorpusError::DurationMismatch { path: path.to_path_buf(), header_sec, decoded_sec });
        }
    }
    Ok((header_sec, spec.sample_rate))
}

/// Reads `<root>/transcripts.tsv` and `<root>/<id>.wav` for one speaker of
/// one language. Durations come from the WAV headers.
pub fn build_manifest_with(
    data_root: impl AsRef<Path>,
    language: Language,
    speaker: &str,
    options: BuildOptions,
) -> Result<Manifest, CorpusError> {
    let root = data_root.as_ref();
    let lines = read_transcripts(&root.join(TRANSCRIPT_FILE), language)?;
    let records = lines
        .par_iter()
        .map(|t| {
            let audio_path = root.join(format!("{}.wav", t.id));
            if !audio_path.is_file() {
                return Err(CorpusError::MissingAudio { id: t.id.clone(), path: audio_path });
            }
            let (duration_sec, sample_rate) = header_duration(&audio_path, options.verify)?;
            if duration_sec <= 0.0 {
                return Err(CorpusError::TranscriptMismatch {
                    line: t.line,
                    reason: format!("{}: audio is empty", t.id),
                });
            }
            Ok(UtteranceRecord {
                id: t.id.clone(),
                language,
                family: language.family(),
                speaker: speaker.to_string(),
                script: language.script(),
                text: t.text.clone(),
                audio_path,
                duration_sec,
                sample_rate,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Manifest::from_records(
        records,
        vec![format!("built from {} ({language}, speaker {speaker})", root.display())],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Audio;

    fn write_corpus(dir: &Path, lines: &[(&str, &str, usize)]) {
        let mut tsv = String::new();
        for (id, text, samples) in lines {
            tsv.push_str(&format!("{id}\t{text}\n"));
            Audio::silence(*samples, 22050).write_wav(dir.join(format!("{id}.wav"))).unwrap();
        }
        std::fs::write(dir.join(TRANSCRIPT_FILE), tsv).unwrap();
    }

    #[test]
    fn three_files_three_records() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("a", "कमल", 22050), ("b", "नयन", 11025), ("c", "घर", 4410)]);
        let m = build_manifest_with(dir.path(), Language::Hindi, "spk1", BuildOptions { verify: true }).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.records[0].duration_sec, 1.0);
        assert!((m.total_duration_sec - 1.7).abs() < 1e-9);
        assert_eq!(m.records[0].family, Family::IndoAryan);
    }

    #[test]
    fn missing_audio() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("a", "कमल", 100)]);
        std::fs::write(dir.path().join(TRANSCRIPT_FILE), "a\tकमल\nb\tघर\n").unwrap();
        assert!(matches!(
            build_manifest(dir.path(), Language::Hindi, "s"),
            Err(CorpusError::MissingAudio { id, .. }) if id == "b"
        ));
    }

    #[test]
    fn unreadable_header() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(TRANSCRIPT_FILE), "a\tकमल\n").unwrap();
        std::fs::write(dir.path().join("a.wav"), b"not a wav").unwrap();
        assert!(matches!(build_manifest(dir.path(), Language::Hindi, "s"), Err(CorpusError::UnreadableHeader { .. })));
    }

    #[test]
    fn transcript_problems() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("a", "কমল", 100)]);
        assert!(matches!(
            build_manifest(dir.path(), Language::Hindi, "s"),
            Err(CorpusError::TranscriptMismatch { line: 1, .. })
        ));
        std::fs::write(dir.path().join(TRANSCRIPT_FILE), "a\tকমল\na\tকমল\n").unwrap();
        assert!(matches!(
            build_manifest(dir.path(), Language::Bengali, "s"),
            Err(CorpusError::TranscriptMismatch { line: 2, .. })
        ));
        std::fs::write(dir.path().join(TRANSCRIPT_FILE), "no tab here\n").unwrap();
        assert!(matches!(build_manifest(dir.path(), Language::Bengali, "s"), Err(CorpusError::TranscriptMismatch { .. })));
    }

    #[test]
    fn jsonl_round_trip_uses_record_field_names() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("a", "கடல்", 22050)]);
        let m = build_manifest(dir.path(), Language::Tamil, "s").unwrap();
        let line = m.to_jsonl();
        for key in ["\"id\"", "\"language\"", "\"family\"", "\"speaker\"", "\"script\"", "\"text\"", "\"audioPath\"", "\"durationSec\"", "\"sampleRate\""] {
            assert!(line.contains(key), "{key} missing from {line}");
        }
        let path = dir.path().join("m.jsonl");
        m.save(&path).unwrap();
        let back = Manifest::load(&path).unwrap();
        assert_eq!(back.records, m.records);
    }
}
