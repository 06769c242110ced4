use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::AttentionError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuidedAttentionConfig {
    pub g: f64,
}

impl Default for GuidedAttentionConfig {
    fn default() -> Self {
        GuidedAttentionConfig { g: 0.2 }
    }
}

impl GuidedAttentionConfig {
    pub fn new(g: f64) -> Result<GuidedAttentionConfig, AttentionError> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(AttentionError::InvalidSpread(g));
        }
        Ok(GuidedAttentionConfig { g })
    }
}

/// Penalty `1 - exp(-(n/N - t/T)^2 / (2 g^2))` for attending encoder step
/// `n` of `N` at decoder step `t` of `T`.
pub fn guided_attention_weight(n: usize, big_n: usize, t: usize, big_t: usize, g: f64) -> Result<f64, AttentionError> {
    if n >= big_n || t >= big_t {
        return Err(AttentionError::IndexOutOfRange { n, big_n, t, big_t });
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(AttentionError::InvalidSpread(g));
    }
    Ok(penalty(n, big_n, t, big_t, g))
}

pub(crate) fn penalty(n: usize, big_n: usize, t: usize, big_t: usize, g: f64) -> f64 {
    let d = n as f64 / big_n as f64 - t as f64 / big_t as f64;
    1.0 - (-d * d / (2.0 * g * g)).exp()
}

/// Decoder-by-encoder attention weights; rows are distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentMatrix {
    weights: Array2<f64>,
}

impl AlignmentMatrix {
    pub fn new(weights: Array2<f64>) -> Result<AlignmentMatrix, AttentionError> {
        if weights.is_empty() {
            return Err(AttentionError::InvalidAlignment("empty matrix".into()));
        }
        for (t, row) in weights.rows().into_iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(AttentionError::InvalidAlignment(format!("row {t} has entry {v} outside [0, 1]")));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(AttentionError::InvalidAlignment(format!("row {t} sums to {sum}")));
            }
        }
        Ok(AlignmentMatrix { weights })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn decoder_steps(&self) -> usize {
        self.weights.nrows()
    }

    pub fn encoder_steps(&self) -> usize {
        self.weights.ncols()
    }
}

/// Mean of `alignment[t][n] * W(n, t)` over the whole grid.
pub fn guided_attention_loss(alignment: &AlignmentMatrix, cfg: &GuidedAttentionConfig) -> f64 {
    let (big_t, big_n) = alignment.weights.dim();
    let mut total = 0.0;
    for ((t, n), a) in alignment.weights.indexed_iter() {
        total += a * penalty(n, big_n, t, big_t, cfg.g);
    }
    total / (big_t * big_n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(guided_attention_weight(3, 10, 6, 20, 0.2).unwrap(), 0.0);
        let w = guided_attention_weight(2, 10, 0, 5, 0.2).unwrap();
        assert!((w - 0.393469).abs() < 1e-6);
        assert!((w - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert_eq!(guided_attention_weight(2, 10, 3, 7, 0.3).unwrap(), guided_attention_weight(3, 7, 2, 10, 0.3).unwrap());
    }

    #[test]
    fn index_checks() {
        assert!(matches!(guided_attention_weight(10, 10, 0, 5, 0.2), Err(AttentionError::IndexOutOfRange { .. })));
        assert!(matches!(guided_attention_weight(0, 10, 5, 5, 0.2), Err(AttentionError::IndexOutOfRange { .. })));
        assert!(matches!(guided_attention_weight(0, 10, 0, 5, 0.0), Err(AttentionError::InvalidSpread(_))));
    }

    #[test]
    fn diagonal_beats_anti_diagonal() {
        let cfg = GuidedAttentionConfig::default();
        let diag = AlignmentMatrix::new(Array2::eye(10)).unwrap();
        let anti = AlignmentMatrix::new(Array2::from_shape_fn((10, 10), |(t, n)| f64::from(t + n == 9))).unwrap();
        assert_eq!(guided_attention_loss(&diag, &cfg), 0.0);
        assert!(guided_attention_loss(&anti, &cfg) > 0.0);
    }

    #[test]
    fn invalid_alignments() {
        assert!(AlignmentMatrix::new(Array2::from_elem((2, 2), 0.4)).is_err());
        assert!(AlignmentMatrix::new(Array2::from_shape_vec((1, 2), vec![1.5, -0.5]).unwrap()).is_err());
    }
}
