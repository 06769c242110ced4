use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::guided::penalty;
use super::location::{location_sensitive_attention, softmax, AttentionOutput, AttentionParams, AttentionShape};
use super::{AttentionError, GuidedAttentionConfig};

/// One attention step plus the decoder position used by the guided term.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionInstance {
    pub query: Array1<f64>,
    pub memory: Array2<f64>,
    pub prev_alignment: Array1<f64>,
    pub params: AttentionParams,
    pub decoder_step: usize,
    pub decoder_len: usize,
    pub guided: GuidedAttentionConfig,
}

/// Shape of the seeded verification instances.
pub const CHECK_SHAPE: AttentionShape = AttentionShape { attention_dim: 3, query_dim: 2, memory_dim: 3, filters: 2, window: 3 };

impl AttentionInstance {
    /// Random instance with 4 to 8 encoder steps and [`CHECK_SHAPE`] parameters.
    pub fn random(seed: u64) -> AttentionInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(4..=8);
        let mut uniform = |shape: (usize, usize)| Array2::from_shape_fn(shape, |_| rng.random_range(-1.0..1.0));
        let s = CHECK_SHAPE;
        let params = AttentionParams {
            query_projection: uniform((s.attention_dim, s.query_dim)),
            memory_projection: uniform((s.attention_dim, s.memory_dim)),
            location_projection: uniform((s.attention_dim, s.filters)),
            location_kernel: uniform((s.filters, s.window)),
            score_vector: uniform((1, s.attention_dim)).row(0).to_owned(),
            bias: uniform((1, s.attention_dim)).row(0).to_owned(),
        };
        let memory = uniform((n, s.memory_dim));
        let query = uniform((1, s.query_dim)).row(0).to_owned();
        let prev_alignment = softmax(uniform((1, n)).row(0).mapv(|v| 2.0 * v).view());
        let decoder_len = n + 3;
        let decoder_step = rng.random_range(0..decoder_len);
        AttentionInstance {
            query,
            memory,
            prev_alignment,
            params,
            decoder_step,
            decoder_len,
            guided: GuidedAttentionConfig::default(),
        }
    }

    /// Same inputs as [`random`](Self::random) with every parameter zero.
    pub fn zero_params(seed: u64) -> AttentionInstance {
        let mut inst = AttentionInstance::random(seed);
        inst.params = AttentionParams::zeros(CHECK_SHAPE);
        inst
    }

    fn forward(&self, params: &AttentionParams) -> AttentionOutput {
        location_sensitive_attention(self.query.view(), &self.memory, self.prev_alignment.view(), params)
            .expect("instance dimensions are consistent")
    }

    /// Per-encoder-step guided penalty, scaled as one row of the grid mean.
    fn guided_row(&self) -> Array1<f64> {
        let n = self.memory.nrows();
        let scale = (self.decoder_len * n) as f64;
        Array1::from_shape_fn(n, |j| penalty(j, n, self.decoder_step, self.decoder_len, self.guided.g) / scale)
    }

    /// Scalar head: sum of context components plus this row's share of the
    /// guided-attention loss.
    pub fn objective(&self, params: &AttentionParams) -> f64 {
        let out = self.forward(params);
        out.context.sum() + out.alignment.dot(&self.guided_row())
    }
}

/// Analytic gradient of [`AttentionInstance::objective`] with respect to the
/// parameters, flattened in [`AttentionParams::flatten`] order.
pub fn analytic_gradient(inst: &AttentionInstance) -> Vec<f64> {
    let p = &inst.params;
    let out = inst.forward(p);
    let n = inst.memory.nrows();
    // objective = Σ_j α_j s_j
    let s = inst.memory.sum_axis(ndarray::Axis(1)) + inst.guided_row();
    let mean_s = out.alignment.dot(&s);
    let delta = &out.alignment * &(&s - mean_s);

    let mut grad = AttentionParams::zeros(p.shape());
    grad.score_vector = out.hidden.t().dot(&delta);
    // ρ_j = δ_j · w ⊙ (1 - z_j²), one row per encoder step.
    let rho = Array2::from_shape_fn(out.hidden.dim(), |(j, a)| {
        let z = out.hidden[[j, a]];
        delta[j] * p.score_vector[a] * (1.0 - z * z)
    });
    grad.bias = rho.sum_axis(ndarray::Axis(0));
    for a in 0..rho.ncols() {
        let r = rho.column(a).sum();
        for q in 0..inst.query.len() {
            grad.query_projection[[a, q]] = r * inst.query[q];
        }
    }
    grad.memory_projection = rho.t().dot(&inst.memory);
    grad.location_projection = rho.t().dot(&out.location_features);
    // Back through the convolution: feature (j, f) read prev[j + m - half] via tap (f, m).
    let d_features = rho.dot(&p.location_projection);
    let (filters, window) = p.location_kernel.dim();
    let half = (window - 1) / 2;
    for f in 0..filters {
        for m in 0..window {
            let mut acc = 0.0;
            for j in 0..n {
                if let Some(src) = (j + m).checked_sub(half).filter(|&src| src < n) {
                    acc += d_features[[j, f]] * inst.prev_alignment[src];
                }
            }
            grad.location_kernel[[f, m]] = acc;
        }
    }
    grad.flatten()
}

/// Central finite differences of the objective, one parameter at a time.
pub fn numeric_gradient(inst: &AttentionInstance, eps: f64) -> Vec<f64> {
    let shape = inst.params.shape();
    let base = inst.params.flatten();
    (0..base.len())
        .map(|i| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[i] += eps;
            minus[i] -= eps;
            let up = inst.objective(&AttentionParams::unflatten(shape, &plus));
            let down = inst.objective(&AttentionParams::unflatten(shape, &minus));
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Largest `|a - n| / max(|a|, |n|, 1e-6)` over all entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

pub fn attention_grad_check(inst: &AttentionInstance, eps: f64) -> Result<f64, AttentionError> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(AttentionError::InvalidStep(eps));
    }
    Ok(max_relative_error(&analytic_gradient(inst), &numeric_gradient(inst, eps)))
}
