use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::FeatureError;

/// Monotonic alignment path from `(0, 0)` to `(last_ref, last_syn)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtwPath {
    pub steps: Vec<(usize, usize)>,
}

impl DtwPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks the start, end and unit-step conditions.
    pub fn is_valid(&self, n_ref: usize, n_syn: usize) -> bool {
        let (Some(&first), Some(&last)) = (self.steps.first(), self.steps.last()) else {
            return false;
        };
        first == (0, 0)
            && n_ref > 0
            && n_syn > 0
            && last == (n_ref - 1, n_syn - 1)
            && self.steps.windows(2).all(|w| {
                let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
                matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub path: DtwPath,
    /// Sum of frame distances along the path.
    pub cost: f64,
}

/// Accumulated cost matrix for steps (1,0), (0,1), (1,1).
pub fn dtw_cost_matrix(
    n_ref: usize,
    n_syn: usize,
    distance: impl Fn(usize, usize) -> f64,
) -> Result<Array2<f64>, FeatureError> {
    if n_ref == 0 || n_syn == 0 {
        return Err(FeatureError::EmptyTrack);
    }
    let mut acc = Array2::from_elem((n_ref, n_syn), f64::INFINITY);
    for i in 0..n_ref {
        for j in 0..n_syn {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[[i - 1, j - 1]] } else { f64::INFINITY };
                let up = if i > 0 { acc[[i - 1, j]] } else { f64::INFINITY };
                let left = if j > 0 { acc[[i, j - 1]] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[[i, j]] = best + distance(i, j);
        }
    }
    Ok(acc)
}

/// Minimum-cost alignment. On ties the backtrack prefers the diagonal
/// predecessor, then the one advancing the reference index.
pub fn dtw_align(
    n_ref: usize,
    n_syn: usize,
    distance: impl Fn(usize, usize) -> f64,
) -> Result<Alignment, FeatureError> {
    let acc = dtw_cost_matrix(n_ref, n_syn, distance)?;
    let (mut i, mut j) = (n_ref - 1, n_syn - 1);
    let mut steps = vec![(i, j)];
    while (i, j) != (0, 0) {
        let mut candidates = Vec::with_capacity(3);
        if i > 0 && j > 0 {
            candidates.push((i - 1, j - 1));
        }
        if i > 0 {
            candidates.push((i - 1, j));
        }
        if j > 0 {
            candidates.push((i, j - 1));
        }
        let mut best = candidates[0];
        for &c in &candidates[1..] {
            if acc[[c.0, c.1]] < acc[[best.0, best.1]] {
                best = c;
            }
        }
        (i, j) = best;
        steps.push(best);
    }
    steps.reverse();
    Ok(Alignment {
        path: DtwPath { steps },
        cost: acc[[n_ref - 1, n_syn - 1]],
    })
}
