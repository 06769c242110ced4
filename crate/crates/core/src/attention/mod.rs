//! Alignment machinery of the acoustic model: guided attention loss,
//! location-sensitive attention and gradient verification.

mod grad;
mod guided;
mod location;

pub use grad::{analytic_gradient, attention_grad_check, max_relative_error, numeric_gradient, AttentionInstance, CHECK_SHAPE};
pub use guided::{guided_attention_loss, guided_attention_weight, AlignmentMatrix, GuidedAttentionConfig};
pub use location::{
    location_features, location_sensitive_attention, softmax, AttentionOutput, AttentionParams, AttentionShape,
};

use ndarray::{Array1, Array2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttentionError {
    #[error("index out of range: n={n} of {big_n}, t={t} of {big_t}")]
    IndexOutOfRange { n: usize, big_n: usize, t: usize, big_t: usize },
    #[error("spread g must be positive, got {0}")]
    InvalidSpread(f64),
    #[error("invalid alignment: {0}")]
    InvalidAlignment(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("finite-difference step {0} outside [1e-7, 1e-3]")]
    InvalidStep(f64),
}

/// Runs attention over one query per decoder step, starting from all mass
/// on the first encoder step, and stacks the alignments.
pub fn rollout(memory: &Array2<f64>, params: &AttentionParams, queries: &Array2<f64>) -> Result<AlignmentMatrix, AttentionError> {
    let n = memory.nrows();
    if n == 0 {
        return Err(AttentionError::DimensionMismatch("memory has no rows".into()));
    }
    let mut prev = Array1::zeros(n);
    prev[0] = 1.0;
    let mut weights = Array2::zeros((queries.nrows(), n));
    for (t, q) in queries.rows().into_iter().enumerate() {
        let out = location_sensitive_attention(q, memory, prev.view(), params)?;
        weights.row_mut(t).assign(&out.alignment);
        prev = out.alignment;
    }
    AlignmentMatrix::new(weights)
}
