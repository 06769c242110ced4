use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{stft, Audio, FeatureError, FrameParams, LOG_FLOOR};

const F_SP: f64 = 200.0 / 3.0;
const MIN_LOG_HZ: f64 = 1000.0;
const MIN_LOG_MEL: f64 = MIN_LOG_HZ / F_SP;
const LOG_STEP: f64 = 0.068_751_777_420_949_12; // ln(6.4) / 27

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    if hz < MIN_LOG_HZ {
        hz / F_SP
    } else {
        MIN_LOG_MEL + (hz / MIN_LOG_HZ).ln() / LOG_STEP
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel < MIN_LOG_MEL {
        mel * F_SP
    } else {
        MIN_LOG_HZ * (LOG_STEP * (mel - MIN_LOG_MEL)).exp()
    }
}

/// Centre frequencies of the mel bands, in Hz.
pub fn mel_centers(params: &FrameParams) -> Vec<f64> {
    let edges = band_edges(params);
    edges[1..=params.n_mels].to_vec()
}

fn band_edges(params: &FrameParams) -> Vec<f64> {
    let lo = hz_to_mel(params.f_min);
    let hi = hz_to_mel(params.f_max);
    let n = params.n_mels + 2;
    (0..n)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Triangular filterbank `[nMels × nBins]` with area normalisation.
pub fn mel_filterbank(params: &FrameParams) -> Array2<f64> {
    let n_bins = params.n_bins();
    let edges = band_edges(params);
    let bin_hz: Vec<f64> = (0..n_bins)
        .map(|k| k as f64 * f64::from(params.sample_rate) / params.fft_size as f64)
        .collect();
    let mut fb = Array2::zeros((params.n_mels, n_bins));
    for m in 0..params.n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let norm = 2.0 / (right - left);
        for (k, &f) in bin_hz.iter().enumerate() {
            let lower = (f - left) / (center - left);
            let upper = (right - f) / (right - center);
            let w = lower.min(upper).max(0.0);
            fb[[m, k]] = w * norm;
        }
    }
    fb
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MelSpectrogram {
    /// Natural-log mel energies, `[nFrames × nMels]`.
    pub frames: Array2<f64>,
    pub params: FrameParams,
}

impl MelSpectrogram {
    pub fn n_frames(&self) -> usize {
        self.frames.nrows()
    }

    pub fn n_mels(&self) -> usize {
        self.frames.ncols()
    }
}

pub fn mel_spectrogram(audio: &Audio, params: &FrameParams) -> Result<MelSpectrogram, FeatureError> {
    params.validate()?;
    if audio.sample_rate != params.sample_rate {
        return Err(FeatureError::RateMismatch {
            expected: params.sample_rate,
            found: audio.sample_rate,
        });
    }
    if audio.len() < params.win_size {
        return Err(FeatureError::TooShort { needed: params.win_size, got: audio.len() });
    }
    let spec = stft(&audio.samples, params)?;
    let magnitude = spec.mapv(|c| c.norm());
    Ok(log_mel_from_magnitude(&magnitude, params))
}

pub(crate) fn log_mel_from_magnitude(magnitude: &Array2<f64>, params: &FrameParams) -> MelSpectrogram {
    let fb = mel_filterbank(params);
    let mel = magnitude.dot(&fb.t());
    MelSpectrogram {
        frames: mel.mapv(|e| e.max(LOG_FLOOR).ln()),
        params: *params,
    }
}
