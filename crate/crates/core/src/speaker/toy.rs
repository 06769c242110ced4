use std::ops::Range;

use super::{SpeakerEmbedding, SpeakerError, EMBEDDING_DIM};
use crate::features::{mel_spectrogram, Audio, FeatureError, FrameParams};

const BANDS: usize = 80;

/// Components that do not change when the signal is rescaled: per-frame
/// level-normalised band means, standard deviations and adjacent-band
/// correlations.
pub const TOY_NORMALIZED_RANGE: Range<usize> = 0..(3 * BANDS - 1);

/// Deterministic stand-in for an x-vector, built from log-mel statistics.
///
/// Layout: normalised means `[0, 80)`, standard deviations `[80, 160)`,
/// adjacent-band correlations `[160, 239)`, raw log-mel means `[239, 319)`,
/// zeros after that.
pub fn toy_embedding(audio: &Audio) -> Result<SpeakerEmbedding, SpeakerError> {
    let needed = audio.sample_rate as usize;
    if audio.len() < needed || needed == 0 {
        return Err(FeatureError::TooShort { needed, got: audio.len() }.into());
    }
    let params = FrameParams {
        sample_rate: audio.sample_rate,
        f_max: FrameParams::default().f_max.min(f64::from(audio.sample_rate) / 2.0),
        n_mels: BANDS,
        ..FrameParams::default()
    };
    let mel = mel_spectrogram(audio, &params)?.frames;
    let frames = mel.nrows() as f64;

    let mut normalised = mel.clone();
    for mut row in normalised.rows_mut() {
        let level = row.mean().unwrap_or(0.0);
        row.mapv_inplace(|v| v - level);
    }
    let means: Vec<f64> = normalised.columns().into_iter().map(|c| c.sum() / frames).collect();
    let stds: Vec<f64> = normalised
        .columns()
        .into_iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / frames).sqrt())
        .collect();
    let correlations: Vec<f64> = (0..BANDS - 1)
        .map(|b| {
            let (x, y) = (normalised.column(b), normalised.column(b + 1));
            let cov = x.iter().zip(y.iter()).map(|(p, q)| (p - means[b]) * (q - means[b + 1])).sum::<f64>() / frames;
            let denom = stds[b] * stds[b + 1];
            if denom > 1e-12 {
                cov / denom
            } else {
                0.0
            }
        })
        .collect();
    let raw_means: Vec<f64> = mel.columns().into_iter().map(|c| c.sum() / frames).collect();

    let mut vector = Vec::with_capacity(EMBEDDING_DIM);
    vector.extend(means);
    vector.extend(stds);
    vector.extend(correlations);
    vector.extend(raw_means);
    vector.resize(EMBEDDING_DIM, 0.0);
    SpeakerEmbedding::new(vector, "")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synthetic::{default_speakers, synthesize_utterance};
    use crate::speaker::cosine;

    #[test]
    fn deterministic() {
        let a = synthesize_utterance(&default_speakers()[0], 1.5, 4);
        assert_eq!(toy_embedding(&a).unwrap(), toy_embedding(&a).unwrap());
    }

    #[test]
    fn six_db_scaling_keeps_normalised_part() {
        let a = synthesize_utterance(&default_speakers()[1], 2.0, 8);
        let louder = Audio::new(a.samples.iter().map(|v| v * 2.0).collect(), a.sample_rate);
        let (ea, eb) = (toy_embedding(&a).unwrap(), toy_embedding(&louder).unwrap());
        let sim = cosine(&ea.vector[TOY_NORMALIZED_RANGE], &eb.vector[TOY_NORMALIZED_RANGE]).unwrap();
        assert!(sim > 0.99, "{sim}");
    }

    #[test]
    fn too_short() {
        assert!(matches!(toy_embedding(&Audio::silence(100, 16000)), Err(SpeakerError::Audio(FeatureError::TooShort { .. }))));
    }
}
