use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::AttentionError;

/// Weights of additive location-sensitive attention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttentionParams {
    /// `[A × Dq]`
    pub query_projection: Array2<f64>,
    /// `[A × Dh]`
    pub memory_projection: Array2<f64>,
    /// `[A × K]`
    pub location_projection: Array2<f64>,
    /// `[K × window]`
    pub location_kernel: Array2<f64>,
    /// `[A]`
    pub score_vector: Array1<f64>,
    /// `[A]`
    pub bias: Array1<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttentionShape {
    pub attention_dim: usize,
    pub query_dim: usize,
    pub memory_dim: usize,
    pub filters: usize,
    pub window: usize,
}

impl AttentionShape {
    pub fn n_params(&self) -> usize {
        let AttentionShape { attention_dim: a, query_dim: q, memory_dim: h, filters: k, window: w } = *self;
        a * q + a * h + a * k + k * w + 2 * a
    }
}

impl AttentionParams {
    pub fn zeros(shape: AttentionShape) -> AttentionParams {
        let AttentionShape { attention_dim: a, query_dim: q, memory_dim: h, filters: k, window: w } = shape;
        AttentionParams {
            query_projection: Array2::zeros((a, q)),
            memory_projection: Array2::zeros((a, h)),
            location_projection: Array2::zeros((a, k)),
            location_kernel: Array2::zeros((k, w)),
            score_vector: Array1::zeros(a),
            bias: Array1::zeros(a),
        }
    }

    pub fn shape(&self) -> AttentionShape {
        AttentionShape {
            attention_dim: self.query_projection.nrows(),
            query_dim: self.query_projection.ncols(),
            memory_dim: self.memory_projection.ncols(),
            filters: self.location_kernel.nrows(),
            window: self.location_kernel.ncols(),
        }
    }

    pub fn validate(&self) -> Result<(), AttentionError> {
        let s = self.shape();
        let mismatch = |what: &str| Err(AttentionError::DimensionMismatch(what.to_string()));
        if s.attention_dim == 0 || s.window == 0 {
            return mismatch("attention dimension and window must be positive");
        }
        if self.memory_projection.nrows() != s.attention_dim
            || self.location_projection.nrows() != s.attention_dim
            || self.score_vector.len() != s.attention_dim
            || self.bias.len() != s.attention_dim
        {
            return mismatch("projections, score vector and bias must share the attention dimension");
        }
        if self.location_projection.ncols() != s.filters {
            return mismatch("location projection columns must equal the number of kernel filters");
        }
        if !self.flatten().iter().all(|v| v.is_finite()) {
            return mismatch("parameters must be finite");
        }
        Ok(())
    }

    /// All parameters in declaration order, each matrix row-major.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.shape().n_params());
        out.extend(self.query_projection.iter());
        out.extend(self.memory_projection.iter());
        out.extend(self.location_projection.iter());
        out.extend(self.location_kernel.iter());
        out.extend(self.score_vector.iter());
        out.extend(self.bias.iter());
        out
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(shape: AttentionShape, flat: &[f64]) -> AttentionParams {
        assert_eq!(flat.len(), shape.n_params());
        let mut p = AttentionParams::zeros(shape);
        let mut it = flat.iter().copied();
        for v in p
            .query_projection
            .iter_mut()
            .chain(p.memory_projection.iter_mut())
            .chain(p.location_projection.iter_mut())
            .chain(p.location_kernel.iter_mut())
            .chain(p.score_vector.iter_mut())
            .chain(p.bias.iter_mut())
        {
            *v = it.next().expect("length checked");
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttentionOutput {
    pub context: Array1<f64>,
    pub alignment: Array1<f64>,
    pub energies: Array1<f64>,
    /// Location features, `[N × K]`.
    pub location_features: Array2<f64>,
    /// `tanh` activations, `[N × A]`.
    pub hidden: Array2<f64>,
}

/// Numerically stable softmax.
pub fn softmax(x: ArrayView1<f64>) -> Array1<f64> {
    let max = x.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exp = x.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// Same-length correlation of the previous alignment with each kernel row,
/// zero-padded, window centred on the output position.
pub fn location_features(prev: ArrayView1<f64>, kernel: &Array2<f64>) -> Array2<f64> {
    let n = prev.len();
    let (k, w) = kernel.dim();
    let half = (w - 1) / 2;
    Array2::from_shape_fn((n, k), |(j, f)| {
        (0..w)
            .filter_map(|m| (j + m).checked_sub(half).filter(|&src| src < n).map(|src| kernel[[f, m]] * prev[src]))
            .sum()
    })
}

pub fn location_sensitive_attention(
    query: ArrayView1<f64>,
    memory: &Array2<f64>,
    prev_alignment: ArrayView1<f64>,
    params: &AttentionParams,
) -> Result<AttentionOutput, AttentionError> {
    params.validate()?;
    let s = params.shape();
    let n = memory.nrows();
    if n == 0 {
        return Err(AttentionError::DimensionMismatch("memory has no rows".into()));
    }
    if query.len() != s.query_dim {
        return Err(AttentionError::DimensionMismatch(format!("query has {} values, expected {}", query.len(), s.query_dim)));
    }
    if memory.ncols() != s.memory_dim {
        return Err(AttentionError::DimensionMismatch(format!("memory rows have {} values, expected {}", memory.ncols(), s.memory_dim)));
    }
    if prev_alignment.len() != n {
        return Err(AttentionError::DimensionMismatch(format!(
            "previous alignment has {} entries for {n} memory rows",
            prev_alignment.len()
        )));
    }
    let total = prev_alignment.sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(AttentionError::InvalidAlignment(format!("previous alignment sums to {total}")));
    }

    let features = location_features(prev_alignment, &params.location_kernel);
    let query_term = params.query_projection.dot(&query) + &params.bias;
    let pre = memory.dot(&params.memory_projection.t()) + features.dot(&params.location_projection.t()) + &query_term;
    let hidden = pre.mapv(f64::tanh);
    let energies = hidden.dot(&params.score_vector);
    let alignment = softmax(energies.view());
    let context = memory.t().dot(&alignment);
    Ok(AttentionOutput { context, alignment, energies, location_features: features, hidden })
}
