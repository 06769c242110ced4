use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use super::mel::log_mel_from_magnitude;
use super::{istft, mel_filterbank, stft, Audio, MelSpectrogram};

/// Linear magnitude estimate from a log-mel spectrogram via the filterbank
/// pseudo-inverse, clamped at zero. Shape `[frames × bins]`.
fn linear_magnitude(mel: &MelSpectrogram) -> Array2<f64> {
    let fb = mel_filterbank(&mel.params);
    let (n_mels, n_bins) = fb.dim();
    let fb = DMatrix::from_row_iterator(n_mels, n_bins, fb.iter().copied());
    let pinv = fb.pseudo_inverse(1e-10).expect("non-negative epsilon");
    let n_frames = mel.frames.nrows();
    let energies = DMatrix::from_row_iterator(n_frames, n_mels, mel.frames.iter().map(|v| v.exp()));
    let linear = energies * pinv.transpose();
    Array2::from_shape_fn((n_frames, n_bins), |(t, k)| linear[(t, k)].max(0.0))
}

fn with_phase(magnitude: &Array2<f64>, phase: impl Fn(usize, usize) -> Complex<f64>) -> Array2<Complex<f64>> {
    Array2::from_shape_fn(magnitude.dim(), |(t, k)| phase(t, k) * magnitude[[t, k]])
}

/// Phase reconstruction by alternating projections, starting from a seeded
/// random phase. Output has `(frames - 1) * hop` samples.
pub fn griffin_lim(mel: &MelSpectrogram, iterations: usize, seed: u64) -> Audio {
    let params = &mel.params;
    let magnitude = linear_magnitude(mel);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial: Vec<Complex<f64>> = (0..magnitude.len())
        .map(|_| Complex::from_polar(1.0, rng.random_range(-PI..PI)))
        .collect();
    let n_bins = magnitude.ncols();
    let mut spec = with_phase(&magnitude, |t, k| initial[t * n_bins + k]);
    let len = params.hop_size * mel.frames.nrows().saturating_sub(1);

    for _ in 0..iterations {
        let signal = istft(&spec, params, Some(len));
        let Ok(rebuilt) = stft(&signal, params) else { break };
        spec = with_phase(&magnitude, |t, k| {
            let c = rebuilt[[t, k]];
            let norm = c.norm();
            if norm > 0.0 {
                c / norm
            } else {
                Complex::new(1.0, 0.0)
            }
        });
    }
    Audio::new(istft(&spec, params, Some(len)), params.sample_rate)
}

/// RMS difference between `target` and the log-mel spectrogram of `audio`.
pub fn mel_error(target: &MelSpectrogram, audio: &Audio) -> f64 {
    let params = &target.params;
    let got = match stft(&audio.samples, params) {
        Ok(spec) => log_mel_from_magnitude(&spec.mapv(|c| c.norm()), params).frames,
        Err(_) => Array2::from_elem((0, target.frames.ncols()), 0.0),
    };
    let rows = got.nrows().min(target.frames.nrows());
    if rows == 0 {
        return f64::INFINITY;
    }
    let diff = &got.slice(ndarray::s![..rows, ..]) - &target.frames.slice(ndarray::s![..rows, ..]);
    (diff.iter().map(|d| d * d).sum::<f64>() / diff.len() as f64).sqrt()
}
