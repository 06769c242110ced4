use std::path::Path;

use super::FeatureError;

/// Mono signal with samples in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Audio {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Audio {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Audio {
        Audio { samples, sample_rate }
    }

    pub fn silence(len: usize, sample_rate: u32) -> Audio {
        Audio::new(vec![0.0; len], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_sec(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Reads a 16-bit PCM mono WAV file.
    pub fn read_wav(path: impl AsRef<Path>) -> Result<Audio, FeatureError> {
        let mut reader = hound::WavReader::open(path)?;
        let spec = reader.spec();
        check_spec(&spec)?;
        let samples = reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Audio::new(samples, spec.sample_rate))
    }

    /// Writes 16-bit PCM mono; samples outside [-1, 1] are clipped.
    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut writer = hound::WavWriter::create(path, spec)?;
        for &s in &self.samples {
            writer.write_sample(to_i16(s))?;
        }
        writer.finalize()?;
        Ok(())
    }

    /// Encodes the signal as an in-memory WAV file.
    pub fn to_wav_bytes(&self) -> Result<Vec<u8>, FeatureError> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut cursor = std::io::Cursor::new(Vec::new());
        {
            let mut writer = hound::WavWriter::new(&mut cursor, spec)?;
            for &s in &self.samples {
                writer.write_sample(to_i16(s))?;
            }
            writer.finalize()?;
        }
        Ok(cursor.into_inner())
    }
}

fn to_i16(s: f64) -> i16 {
    (s.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

pub(crate) fn check_spec(spec: &hound::WavSpec) -> Result<(), FeatureError> {
    if spec.channels != 1 {
        return Err(FeatureError::UnsupportedWav(format!("{} channels, expected mono", spec.channels)));
    }
    if spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(FeatureError::UnsupportedWav(format!(
            "{}-bit {:?} samples, expected 16-bit PCM",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    Ok(())
}
