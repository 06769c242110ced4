use std::f64::consts::{LN_10, PI};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{dtw_align, Alignment, FeatureError, MelSpectrogram};

/// `10 / ln 10`, the dB scale factor of mel-cepstral distortion.
pub const MCD_SCALE: f64 = 10.0 / LN_10;

/// Mel-cepstra `c_0..c_D` per frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McepTrack {
    pub frames: Array2<f64>,
    pub order: usize,
}

impl McepTrack {
    pub fn new(frames: Array2<f64>) -> Result<McepTrack, FeatureError> {
        if frames.ncols() < 2 {
            return Err(FeatureError::InvalidOrder);
        }
        let order = frames.ncols() - 1;
        Ok(McepTrack { frames, order })
    }

    pub fn n_frames(&self) -> usize {
        self.frames.nrows()
    }
}

/// Orthonormal DCT-II basis, `[(order+1) × n]`.
fn dct_basis(n: usize, order: usize) -> Array2<f64> {
    Array2::from_shape_fn((order + 1, n), |(k, i)| {
        let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        scale * (PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64).cos()
    })
}

pub fn mcep(mel: &MelSpectrogram, order: usize) -> Result<McepTrack, FeatureError> {
    if order == 0 {
        return Err(FeatureError::InvalidOrder);
    }
    let n_mels = mel.frames.ncols();
    if order >= n_mels {
        return Err(FeatureError::OrderTooHigh { order, n_mels });
    }
    let basis = dct_basis(n_mels, order);
    Ok(McepTrack {
        frames: mel.frames.dot(&basis.t()),
        order,
    })
}

/// Distortion between two cepstral frames in dB, `c_0` excluded.
pub fn mcd_frame_distance(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).skip(1).map(|(x, y)| (x - y) * (x - y)).sum();
    MCD_SCALE * (2.0 * sq).sqrt()
}

/// DTW-aligned MCD averaged over path steps. Returns the score and the alignment.
pub fn mcd(reference: &McepTrack, synthesized: &McepTrack) -> Result<(f64, Alignment), FeatureError> {
    if reference.order != synthesized.order {
        return Err(FeatureError::OrderMismatch {
            reference: reference.order,
            synthesized: synthesized.order,
        });
    }
    let (r, s) = (&reference.frames, &synthesized.frames);
    let alignment = dtw_align(r.nrows(), s.nrows(), |i, j| {
        mcd_frame_distance(r.row(i).as_slice().unwrap(), s.row(j).as_slice().unwrap())
    })?;
    let score = alignment.cost / alignment.path.len() as f64;
    Ok((score, alignment))
}
