use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{hann_window, Audio, FeatureError, DEFAULT_NOTCH_Q, MAX_NOTCHES};

/// Second-order IIR section, coefficients normalised so `a0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Notch at `f0` whose -3 dB bandwidth is exactly `f0 / q`.
    pub fn notch(f0: f64, q: f64, sample_rate: u32) -> Result<Biquad, FeatureError> {
        let nyquist = f64::from(sample_rate) / 2.0;
        if !(f0 > 0.0 && f0 < nyquist) {
            return Err(FeatureError::InvalidFrequency { f0, nyquist });
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(FeatureError::InvalidQ(q));
        }
        let w0 = 2.0 * PI * f0 / f64::from(sample_rate);
        let alpha = (w0 / (2.0 * q)).tan();
        let a0 = 1.0 + alpha;
        let cos = w0.cos();
        Ok(Biquad {
            b: [1.0 / a0, -2.0 * cos / a0, 1.0 / a0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        })
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let (mut z1, mut z2) = (0.0, 0.0);
        input
            .iter()
            .map(|&x| {
                let y = self.b[0] * x + z1;
                z1 = self.b[1] * x - self.a[0] * y + z2;
                z2 = self.b[2] * x - self.a[1] * y;
                y
            })
            .collect()
    }

    /// Magnitude response at `freq` Hz.
    pub fn magnitude_at(&self, freq: f64, sample_rate: u32) -> f64 {
        let w = 2.0 * PI * freq / f64::from(sample_rate);
        let z1 = Complex::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = self.b[0] + self.b[1] * z1 + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z1 + self.a[1] * z2;
        (num / den).norm()
    }
}

pub fn notch_filter(audio: &Audio, f0: f64, q: f64) -> Result<Audio, FeatureError> {
    let filter = Biquad::notch(f0, q, audio.sample_rate)?;
    Ok(Audio::new(filter.process(&audio.samples), audio.sample_rate))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NoiseLine {
    pub frequency_hz: f64,
    /// Mean height above the local spectral median, in dB.
    pub prominence_db: f64,
}

const ANALYSIS_FFT: usize = 4096;
const ANALYSIS_HOP: usize = 1024;
const NEIGHBOURHOOD: usize = 16;
const GUARD: usize = 2;
const MIN_PROMINENCE_DB: f64 = 10.0;
const MIN_PERSISTENCE: f64 = 0.9;
/// Peak power floor relative to a full-scale sinusoid.
const ABSOLUTE_FLOOR_DB: f64 = -100.0;

fn power_db_frames(samples: &[f64]) -> Vec<Vec<f64>> {
    let window = hann_window(ANALYSIS_FFT, ANALYSIS_FFT);
    let full_scale = (window.iter().sum::<f64>() / 2.0).powi(2);
    let fft = FftPlanner::new().plan_fft_forward(ANALYSIS_FFT);
    let n_bins = ANALYSIS_FFT / 2 + 1;
    let mut buf = vec![Complex::new(0.0, 0.0); ANALYSIS_FFT];
    let mut frames = Vec::new();
    let mut start = 0;
    while start + ANALYSIS_FFT <= samples.len() {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(samples[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        frames.push(
            buf[..n_bins]
                .iter()
                .map(|c| 10.0 * (c.norm_sqr() / full_scale).max(1e-30).log10())
                .collect(),
        );
        start += ANALYSIS_HOP;
    }
    frames
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn local_median(spec: &[f64], k: usize) -> f64 {
    let lo = k.saturating_sub(NEIGHBOURHOOD);
    let hi = (k + NEIGHBOURHOOD).min(spec.len() - 1);
    let mut around: Vec<f64> = (lo..=hi).filter(|&i| i.abs_diff(k) > GUARD).map(|i| spec[i]).collect();
    median(&mut around)
}

fn peak_prominence(spec: &[f64], k: usize) -> Option<f64> {
    if k == 0 || k + 1 >= spec.len() || spec[k] < spec[k - 1] || spec[k] < spec[k + 1] {
        return None;
    }
    if spec[k] < ABSOLUTE_FLOOR_DB {
        return None;
    }
    let prominence = spec[k] - local_median(spec, k);
    (prominence >= MIN_PROMINENCE_DB).then_some(prominence)
}

/// Narrowband peaks present in at least 90% of analysis frames, most
/// prominent first.
pub fn detect_line_noise(audio: &Audio) -> Result<Vec<NoiseLine>, FeatureError> {
    let needed = (audio.sample_rate as usize).max(ANALYSIS_FFT);
    if audio.len() < needed {
        return Err(FeatureError::TooShort { needed, got: audio.len() });
    }
    let frames = power_db_frames(&audio.samples);
    let n_bins = ANALYSIS_FFT / 2 + 1;
    let mut hits = vec![0usize; n_bins];
    for spec in &frames {
        let mut marked = vec![false; n_bins];
        for k in 1..n_bins - 1 {
            if peak_prominence(spec, k).is_some() {
                // A line may wander by one bin between frames.
                for m in k - 1..=k + 1 {
                    marked[m] = true;
                }
            }
        }
        for (h, m) in hits.iter_mut().zip(marked) {
            *h += usize::from(m);
        }
    }
    let required = (MIN_PERSISTENCE * frames.len() as f64).ceil() as usize;
    let mean: Vec<f64> = (0..n_bins)
        .map(|k| frames.iter().map(|f| f[k]).sum::<f64>() / frames.len() as f64)
        .collect();

    let mut lines = Vec::new();
    let mut k = 1;
    while k < n_bins - 1 {
        if hits[k] < required {
            k += 1;
            continue;
        }
        let start = k;
        while k < n_bins - 1 && hits[k] >= required {
            k += 1;
        }
        let peak = (start..k).max_by(|&a, &b| mean[a].total_cmp(&mean[b])).unwrap();
        let Some(prominence) = peak_prominence(&mean, peak) else { continue };
        let (l, c, r) = (mean[peak - 1], mean[peak], mean[peak + 1]);
        let denom = l - 2.0 * c + r;
        let shift = if denom.abs() > 1e-12 { (0.5 * (l - r) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        lines.push(NoiseLine {
            frequency_hz: (peak as f64 + shift) * f64::from(audio.sample_rate) / ANALYSIS_FFT as f64,
            prominence_db: prominence,
        });
    }
    lines.sort_by(|a, b| b.prominence_db.total_cmp(&a.prominence_db));
    Ok(lines)
}

/// Detects line noise and notches out the most prominent lines.
pub fn remove_line_noise(audio: &Audio, q: Option<f64>) -> Result<(Audio, Vec<NoiseLine>), FeatureError> {
    let q = q.unwrap_or(DEFAULT_NOTCH_Q);
    let mut lines = detect_line_noise(audio)?;
    lines.truncate(MAX_NOTCHES);
    let mut out = audio.clone();
    for line in &lines {
        out = notch_filter(&out, line.frequency_hz, q)?;
    }
    Ok((out, lines))
}
