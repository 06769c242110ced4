//! Speaker embeddings: archive loading, per-speaker means and conditioning
//! of encoder states.

mod toy;

pub use toy::{toy_embedding, TOY_NORMALIZED_RANGE};

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

pub const EMBEDDING_DIM: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum SpeakerError {
    #[error("line {line}: expected {EMBEDDING_DIM} values, found {found}")]
    BadDimension { line: usize, found: usize },
    #[error("line {line}: utterance {id} appears more than once")]
    DuplicateUtterance { line: usize, id: String },
    #[error("line {line}: {reason}")]
    CorruptArchive { line: usize, reason: String },
    #[error("speaker {0} has no utterances in the membership table")]
    UnknownSpeaker(String),
    #[error("utterance {utterance} of speaker {speaker} has no embedding")]
    MissingEmbedding { speaker: String, utterance: String },
    #[error("cosine similarity is undefined for an all-zero vector")]
    ZeroVector,
    #[error("embedding must have {EMBEDDING_DIM} finite components")]
    InvalidVector,
    #[error("encoder states must be finite with at least one row")]
    InvalidStates,
    #[error(transparent)]
    Audio(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpeakerEmbedding {
    pub vector: Vec<f64>,
    /// Empty until the embedding is attributed to a speaker.
    pub speaker: String,
    /// Utterances averaged into this embedding; empty for per-utterance ones.
    pub source_utterances: Vec<String>,
}

impl SpeakerEmbedding {
    pub fn new(vector: Vec<f64>, speaker: impl Into<String>) -> Result<SpeakerEmbedding, SpeakerError> {
        if vector.len() != EMBEDDING_DIM || !vector.iter().all(|v| v.is_finite()) {
            return Err(SpeakerError::InvalidVector);
        }
        Ok(SpeakerEmbedding { vector, speaker: speaker.into(), source_utterances: Vec::new() })
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Parses `utterance-id v1 v2 ... v512` lines. Blank lines are skipped.
pub fn parse_embeddings(src: &str) -> Result<BTreeMap<String, SpeakerEmbedding>, SpeakerError> {
    let mut out = BTreeMap::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let mut fields = raw.split_whitespace();
        let Some(id) = fields.next() else { continue };
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| SpeakerError::CorruptArchive { line, reason: format!("`{f}` is not a finite number") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != EMBEDDING_DIM {
            return Err(SpeakerError::BadDimension { line, found: values.len() });
        }
        if out.contains_key(id) {
            return Err(SpeakerError::DuplicateUtterance { line, id: id.to_string() });
        }
        out.insert(id.to_string(), SpeakerEmbedding { vector: values, speaker: String::new(), source_utterances: Vec::new() });
    }
    Ok(out)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<BTreeMap<String, SpeakerEmbedding>, SpeakerError> {
    parse_embeddings(&std::fs::read_to_string(path)?)
}

pub fn write_embeddings(path: impl AsRef<Path>, embs: &BTreeMap<String, SpeakerEmbedding>) -> Result<(), SpeakerError> {
    let mut out = String::new();
    for (id, e) in embs {
        out.push_str(id);
        for v in &e.vector {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parses `utterance-id<TAB>speaker-id` lines.
pub fn parse_membership(src: &str) -> Result<BTreeMap<String, String>, SpeakerError> {
    let mut out = BTreeMap::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (utt, spk) = raw
            .split_once('\t')
            .map(|(u, s)| (u.trim(), s.trim()))
            .filter(|(u, s)| !u.is_empty() && !s.is_empty())
            .ok_or_else(|| SpeakerError::CorruptArchive { line, reason: "expected `utterance<TAB>speaker`".into() })?;
        if out.insert(utt.to_string(), spk.to_string()).is_some() {
            return Err(SpeakerError::DuplicateUtterance { line, id: utt.to_string() });
        }
    }
    Ok(out)
}

pub fn load_membership(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>, SpeakerError> {
    parse_membership(&std::fs::read_to_string(path)?)
}

/// Componentwise mean of the speaker's utterance embeddings, optionally
/// length-normalising each one first.
pub fn mean_speaker_embedding(
    embs: &BTreeMap<String, SpeakerEmbedding>,
    speaker: &str,
    membership: &BTreeMap<String, String>,
    length_normalize: bool,
) -> Result<SpeakerEmbedding, SpeakerError> {
    let utterances: Vec<&String> = membership.iter().filter(|(_, s)| s.as_str() == speaker).map(|(u, _)| u).collect();
    if utterances.is_empty() {
        return Err(SpeakerError::UnknownSpeaker(speaker.to_string()));
    }
    let mut sum = vec![0.0; EMBEDDING_DIM];
    for utt in &utterances {
        let e = embs.get(*utt).ok_or_else(|| SpeakerError::MissingEmbedding {
            speaker: speaker.to_string(),
            utterance: utt.to_string(),
        })?;
        let scale = if length_normalize {
            let n = e.norm();
            if n == 0.0 {
                return Err(SpeakerError::ZeroVector);
            }
            1.0 / n
        } else {
            1.0
        };
        for (acc, v) in sum.iter_mut().zip(&e.vector) {
            *acc += v * scale;
        }
    }
    let n = utterances.len() as f64;
    Ok(SpeakerEmbedding {
        vector: sum.into_iter().map(|v| v / n).collect(),
        speaker: speaker.to_string(),
        source_utterances: utterances.into_iter().cloned().collect(),
    })
}

/// Encoder outputs, one row per input step.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderStates(Array2<f64>);

impl EncoderStates {
    pub fn new(states: Array2<f64>) -> Result<EncoderStates, SpeakerError> {
        if states.nrows() == 0 || !states.iter().all(|v| v.is_finite()) {
            return Err(SpeakerError::InvalidStates);
        }
        Ok(EncoderStates(states))
    }

    pub fn steps(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }
}

/// Appends the embedding to every encoder state: `[N × E] → [N × (E + 512)]`.
pub fn condition_encoder_states(states: &EncoderStates, emb: &SpeakerEmbedding) -> EncoderStates {
    let (n, e) = states.0.dim();
    let mut out = Array2::zeros((n, e + emb.vector.len()));
    out.slice_mut(s![.., ..e]).assign(&states.0);
    for mut row in out.rows_mut() {
        for (dst, v) in row.iter_mut().skip(e).zip(&emb.vector) {
            *dst = *v;
        }
    }
    EncoderStates(out)
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SpeakerError> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(SpeakerError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub fn cosine_similarity(a: &SpeakerEmbedding, b: &SpeakerEmbedding) -> Result<f64, SpeakerError> {
    cosine(&a.vector, &b.vector)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, v: impl Fn(usize) -> f64) -> String {
        let mut s = id.to_string();
        for i in 0..EMBEDDING_DIM {
            s.push_str(&format!(" {}", v(i)));
        }
        s
    }

    #[test]
    fn archive_parsing() {
        let src = [row("a", |i| i as f64), row("b", |_| 0.5), row("c", |i| -(i as f64))].join("\n");
        let m = parse_embeddings(&src).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m["a"].vector[511], 511.0);

        let short = format!("x {}", vec!["1.0"; 500].join(" "));
        assert!(matches!(parse_embeddings(&short), Err(SpeakerError::BadDimension { line: 1, found: 500 })));

        let dup = [row("a", |_| 1.0), row("a", |_| 2.0)].join("\n");
        assert!(matches!(parse_embeddings(&dup), Err(SpeakerError::DuplicateUtterance { line: 2, .. })));

        let bad = row("a", |_| 1.0).replacen(" 1", " one", 1);
        assert!(matches!(parse_embeddings(&bad), Err(SpeakerError::CorruptArchive { line: 1, .. })));
    }

    fn embs(vectors: &[(&str, Vec<f64>)]) -> BTreeMap<String, SpeakerEmbedding> {
        vectors.iter().map(|(id, v)| (id.to_string(), SpeakerEmbedding::new(v.clone(), "").unwrap())).collect()
    }

    #[test]
    fn mean_examples() {
        let v: Vec<f64> = (0..512).map(|i| (i as f64).sin()).collect();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let membership = parse_membership("u1\tA\nu2\tA\nu3\tB\n").unwrap();
        let same = embs(&[("u1", v.clone()), ("u2", v.clone()), ("u3", neg.clone())]);
        let m = mean_speaker_embedding(&same, "A", &membership, false).unwrap();
        assert_eq!(m.vector, v);
        assert_eq!(m.source_utterances, ["u1", "u2"]);
        let opposite = embs(&[("u1", v.clone()), ("u2", neg), ("u3", v)]);
        let m = mean_speaker_embedding(&opposite, "A", &membership, false).unwrap();
        assert!(m.vector.iter().all(|&x| x == 0.0));
        assert!(matches!(mean_speaker_embedding(&same, "Z", &membership, false), Err(SpeakerError::UnknownSpeaker(_))));
    }

    #[test]
    fn conditioning_shape() {
        let states = EncoderStates::new(Array2::from_shape_fn((3, 4), |(i, j)| (i * 4 + j) as f64)).unwrap();
        let emb = SpeakerEmbedding::new((0..512).map(|i| i as f64).collect(), "A").unwrap();
        let out = condition_encoder_states(&states, &emb);
        assert_eq!(out.as_array().dim(), (3, 516));
        assert_eq!(out.as_array().slice(s![.., ..4]), states.as_array());
        for r in out.as_array().rows() {
            assert_eq!(r[4 + 100], 100.0);
        }
        let zero = SpeakerEmbedding::new(vec![0.0; 512], "").unwrap();
        let padded = condition_encoder_states(&states, &zero);
        assert!(padded.as_array().slice(s![.., 4..]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cosine_examples() {
        let mut a = vec![0.0; 512];
        let mut b = vec![0.0; 512];
        a[0] = 1.0;
        b[1] = 1.0;
        assert_eq!(cosine(&a, &a).unwrap(), 1.0);
        assert_eq!(cosine(&a, &b).unwrap(), 0.0);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert_eq!(cosine(&a, &neg).unwrap(), -1.0);
        assert!(matches!(cosine(&a, &vec![0.0; 512]), Err(SpeakerError::ZeroVector)));
    }
}
