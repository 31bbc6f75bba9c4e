//! Binary linear SVM trained with a simplified pairwise optimizer.

use crate::error::{Error, Result};
use crate::rng::Rng64;

/// Trained model: the support vectors with their multipliers and bias.
#[derive(Clone, Debug)]
pub struct SvmModel {
    pub dims: usize,
    /// Flat `n_sv x dims`, rows of the training input.
    pub support_points: Vec<f64>,
    /// `+1` / `-1` per support vector.
    pub support_labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Row identity of each support vector in the caller's global order.
    pub support_global_indexes: Vec<u64>,
}

impl SvmModel {
    pub fn n_support(&self) -> usize {
        self.alphas.len()
    }

    /// Decision value `sum(alpha_i y_i <x_i, p>) + b`.
    pub fn decision(&self, point: &[f64]) -> f64 {
        let mut acc = self.bias;
        for (i, sv) in self.support_points.chunks_exact(self.dims).enumerate() {
            let dot: f64 = sv.iter().zip(point.iter()).map(|(a, b)| a * b).sum();
            acc += self.alphas[i] * self.support_labels[i] * dot;
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct SmoParams {
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    /// Seed for the second-index choice; fixing it fixes the whole run.
    pub seed: u64,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10,
            seed: 0,
        }
    }
}

const ALPHA_SUPPORT_EPS: f64 = 1e-12;
const ALPHA_STEP_EPS: f64 = 1e-5;

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Train a linear SVM on `points` (`rows x dims`) with labels in `{-1, +1}`.
///
/// `global_indexes` names each row in the caller's global order and is carried
/// into the model so merged trainings can deduplicate support vectors.
pub fn smo_train(
    points: &[f64],
    labels: &[f64],
    dims: usize,
    global_indexes: &[u64],
    params: &SmoParams,
) -> Result<SvmModel> {
    let n = labels.len();
    if n == 0 || points.len() != n * dims || global_indexes.len() != n {
        return Err(Error::InvalidArgument(
            "smo_train: inconsistent points/labels/indexes arity".into(),
        ));
    }
    let mut pos = 0usize;
    for &y in labels {
        if y != 1.0 && y != -1.0 {
            return Err(Error::InvalidArgument(format!(
                "smo_train: label {y} is not +1/-1"
            )));
        }
        if y > 0.0 {
            pos += 1;
        }
    }
    if pos == 0 || pos == n {
        return Err(Error::SingleClassGroup {
            group: format!("{n} rows, all labels {}", labels[0]),
        });
    }

    let row = |i: usize| &points[i * dims..(i + 1) * dims];
    let kernel = |i: usize, j: usize| dot(row(i), row(j));

    let mut alphas = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let mut rng = Rng64::new(params.seed);

    let decision = |alphas: &[f64], bias: f64, x: &[f64]| -> f64 {
        let mut acc = bias;
        for (j, &a) in alphas.iter().enumerate() {
            if a > 0.0 {
                acc += a * labels[j] * dot(row(j), x);
            }
        }
        acc
    };

    // Pairwise coordinate ascent over the dual. A full pass that changes
    // nothing counts toward max_passes; any change resets the count.
    let mut passes = 0usize;
    let mut sweeps = 0usize;
    let sweep_cap = 1000 * params.max_passes.max(1);
    while passes < params.max_passes && sweeps < sweep_cap {
        sweeps += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = decision(&alphas, bias, row(i)) - labels[i];
            let r_i = labels[i] * e_i;
            if !((r_i < -params.tol && alphas[i] < params.c)
                || (r_i > params.tol && alphas[i] > 0.0))
            {
                continue;
            }
            let mut j = rng.next_index(n - 1);
            if j >= i {
                j += 1;
            }
            let e_j = decision(&alphas, bias, row(j)) - labels[j];
            let (a_i_old, a_j_old) = (alphas[i], alphas[j]);
            let (lo, hi) = if labels[i] != labels[j] {
                (
                    (a_j_old - a_i_old).max(0.0),
                    (params.c + a_j_old - a_i_old).min(params.c),
                )
            } else {
                (
                    (a_i_old + a_j_old - params.c).max(0.0),
                    (a_i_old + a_j_old).min(params.c),
                )
            };
            if lo >= hi {
                continue;
            }
            let eta = 2.0 * kernel(i, j) - kernel(i, i) - kernel(j, j);
            if eta >= 0.0 {
                continue;
            }
            let mut a_j = a_j_old - labels[j] * (e_i - e_j) / eta;
            a_j = a_j.clamp(lo, hi);
            if (a_j - a_j_old).abs() < ALPHA_STEP_EPS {
                continue;
            }
            let a_i = a_i_old + labels[i] * labels[j] * (a_j_old - a_j);
            let b1 = bias
                - e_i
                - labels[i] * (a_i - a_i_old) * kernel(i, i)
                - labels[j] * (a_j - a_j_old) * kernel(i, j);
            let b2 = bias
                - e_j
                - labels[i] * (a_i - a_i_old) * kernel(i, j)
                - labels[j] * (a_j - a_j_old) * kernel(j, j);
            bias = if a_i > 0.0 && a_i < params.c {
                b1
            } else if a_j > 0.0 && a_j < params.c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            alphas[i] = a_i;
            alphas[j] = a_j;
            changed += 1;
        }
        passes = if changed == 0 { passes + 1 } else { 0 };
    }

    let mut model = SvmModel {
        dims,
        support_points: Vec::new(),
        support_labels: Vec::new(),
        alphas: Vec::new(),
        bias,
        support_global_indexes: Vec::new(),
    };
    for i in 0..n {
        if alphas[i] > ALPHA_SUPPORT_EPS {
            model.support_points.extend_from_slice(row(i));
            model.support_labels.push(labels[i]);
            model.alphas.push(alphas[i]);
            model.support_global_indexes.push(global_indexes[i]);
        }
    }
    Ok(model)
}

/// Predicted labels for `rows x dims` points; a decision value of zero maps to `+1`.
pub fn svm_predict(model: &SvmModel, points: &[f64]) -> Vec<f64> {
    points
        .chunks_exact(model.dims)
        .map(|p| if model.decision(p) < 0.0 { -1.0 } else { 1.0 })
        .collect()
}
