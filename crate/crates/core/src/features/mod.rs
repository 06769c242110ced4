//! Acoustic features and objective evaluation.
//!
//! Log-mel spectrograms, mel-cepstra, DTW alignment and mel-cepstral
//! distortion, line-noise detection and notch filtering, plus Griffin-Lim
//! inversion so mel features can be listened to without a neural vocoder.

mod audio;
mod dtw;
mod dump;
mod griffin_lim;
mod mcep;
mod mel;
mod notch;
mod stft;

pub use audio::Audio;
pub use dtw::{dtw_align, dtw_cost_matrix, Alignment, DtwPath};
pub use dump::{matrix_from_bytes, matrix_to_bytes, read_matrix, sidecar_path, write_matrix, MATRIX_MAGIC};
pub use griffin_lim::{griffin_lim, mel_error};
pub use mcep::{mcd, mcd_frame_distance, mcep, McepTrack, MCD_SCALE};
pub use mel::{hz_to_mel, mel_centers, mel_filterbank, mel_spectrogram, mel_to_hz, MelSpectrogram};
pub use notch::{detect_line_noise, notch_filter, remove_line_noise, Biquad, NoiseLine};
pub use stft::{hann_window, istft, stft, Spectrogram};

use serde::{Deserialize, Serialize};

/// Floor applied to mel energies before the logarithm.
pub const LOG_FLOOR: f64 = 1e-5;
/// Mel-cepstral order used for MCD unless overridden.
pub const DEFAULT_MCEP_ORDER: usize = 24;
/// Quality factor for line-noise notches.
pub const DEFAULT_NOTCH_Q: f64 = 30.0;
/// At most this many notches are applied by [`remove_line_noise`].
pub const MAX_NOTCHES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameParams {
    pub sample_rate: u32,
    pub fft_size: usize,
    pub hop_size: usize,
    pub win_size: usize,
    pub n_mels: usize,
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for FrameParams {
    fn default() -> Self {
        FrameParams {
            sample_rate: 22050,
            fft_size: 1024,
            hop_size: 256,
            win_size: 1024,
            n_mels: 80,
            f_min: 0.0,
            f_max: 8000.0,
        }
    }
}

impl FrameParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: &str| Err(FeatureError::InvalidParams(m.to_string()));
        if self.sample_rate == 0 {
            return bad("sample rate must be positive");
        }
        if self.fft_size < 2 || self.fft_size % 2 != 0 {
            return bad("fft size must be even and at least 2");
        }
        if self.win_size == 0 || self.win_size > self.fft_size {
            return bad("window size must be in 1..=fft size");
        }
        if self.hop_size == 0 {
            return bad("hop size must be positive");
        }
        if self.n_mels == 0 {
            return bad("need at least one mel band");
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        if !(self.f_min >= 0.0 && self.f_min < self.f_max && self.f_max <= nyquist) {
            return bad("need 0 <= fMin < fMax <= sampleRate/2");
        }
        Ok(())
    }

    /// Frames produced for `len` samples with centre padding of fftSize/2.
    pub fn frame_count(&self, len: usize) -> usize {
        1 + len / self.hop_size
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("sample rate {found} Hz does not match the configured {expected} Hz")]
    RateMismatch { expected: u32, found: u32 },
    #[error("cepstral order {order} must be below the number of mel bands ({n_mels})")]
    OrderTooHigh { order: usize, n_mels: usize },
    #[error("cepstral order must be at least 1")]
    InvalidOrder,
    #[error("feature track is empty")]
    EmptyTrack,
    #[error("cepstral orders differ: {reference} vs {synthesized}")]
    OrderMismatch { reference: usize, synthesized: usize },
    #[error("notch frequency {f0} Hz must lie strictly between 0 and {nyquist} Hz")]
    InvalidFrequency { f0: f64, nyquist: f64 },
    #[error("quality factor must be positive, got {0}")]
    InvalidQ(f64),
    #[error("invalid frame parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported wav: {0}")]
    UnsupportedWav(String),
    #[error("malformed feature dump: {0}")]
    BadDump(String),
    #[error(transparent)]
    Wav(#[from] hound::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
