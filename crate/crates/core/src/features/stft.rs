use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{FeatureError, FrameParams};

/// Complex STFT, `[frames × (fftSize/2 + 1)]`.
pub type Spectrogram = Array2<Complex<f64>>;

/// Periodic Hann window of `win_size`, zero-padded and centred in `fft_size`.
pub fn hann_window(win_size: usize, fft_size: usize) -> Vec<f64> {
    let mut w = vec![0.0; fft_size];
    let offset = (fft_size - win_size) / 2;
    for i in 0..win_size {
        w[offset + i] = 0.5 - 0.5 * (2.0 * PI * i as f64 / win_size as f64).cos();
    }
    w
}

fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| x[i]));
    out.extend_from_slice(x);
    out.extend((0..pad).map(|i| x[n - 2 - i]));
    out
}

/// Centred STFT with reflective padding of fftSize/2 on both sides.
pub fn stft(samples: &[f64], params: &FrameParams) -> Result<Spectrogram, FeatureError> {
    params.validate()?;
    let pad = params.fft_size / 2;
    if samples.len() <= pad || samples.len() < params.win_size {
        return Err(FeatureError::TooShort {
            needed: params.win_size.max(pad + 1),
            got: samples.len(),
        });
    }
    let padded = reflect_pad(samples, pad);
    let window = hann_window(params.win_size, params.fft_size);
    let n_frames = params.frame_count(samples.len());
    let n_bins = params.n_bins();
    let fft = FftPlanner::new().plan_fft_forward(params.fft_size);

    let mut out = Array2::zeros((n_frames, n_bins));
    let mut buf = vec![Complex::new(0.0, 0.0); params.fft_size];
    for t in 0..n_frames {
        let start = t * params.hop_size;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(padded[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for k in 0..n_bins {
            out[[t, k]] = buf[k];
        }
    }
    Ok(out)
}

/// Weighted overlap-add inverse of [`stft`]. Returns `(frames - 1) * hop`
/// samples unless `length` is given.
pub fn istft(spec: &Spectrogram, params: &FrameParams, length: Option<usize>) -> Vec<f64> {
    let (n_frames, n_bins) = spec.dim();
    let n_fft = params.fft_size;
    debug_assert_eq!(n_bins, n_fft / 2 + 1);
    let window = hann_window(params.win_size, n_fft);
    let ifft = FftPlanner::new().plan_fft_inverse(n_fft);
    let total = n_fft + params.hop_size * n_frames.saturating_sub(1);
    let mut signal = vec![0.0; total];
    let mut norm = vec![0.0; total];
    let mut buf = vec![Complex::new(0.0, 0.0); n_fft];

    for t in 0..n_frames {
        for k in 0..n_bins {
            buf[k] = spec[[t, k]];
        }
        // Hermitian completion; DC and Nyquist must be real.
        buf[0].im = 0.0;
        buf[n_fft / 2].im = 0.0;
        for k in 1..n_fft / 2 {
            buf[n_fft - k] = buf[k].conj();
        }
        ifft.process(&mut buf);
        let start = t * params.hop_size;
        for i in 0..n_fft {
            signal[start + i] += buf[i].re / n_fft as f64 * window[i];
            norm[start + i] += window[i] * window[i];
        }
    }
    for (s, n) in signal.iter_mut().zip(&norm) {
        if *n > 1e-10 {
            *s /= n;
        }
    }
    let pad = n_fft / 2;
    let len = length.unwrap_or(params.hop_size * n_frames.saturating_sub(1));
    let mut out: Vec<f64> = signal.into_iter().skip(pad).take(len).collect();
    out.resize(len, 0.0);
    out
}
