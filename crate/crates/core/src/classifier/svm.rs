//! Soft-margin binary SVM with a Gaussian kernel, solved by sequential
//! minimal optimization on the dual with maximal-violating-pair working
//! set selection.

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::pose::FEATURES_PER_POSE;

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 10_000;

/// Trained binary classifier: kernel expansion over its support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<[f64; FEATURES_PER_POSE]>,
    /// `alpha_k * y_k` per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub gamma: f64,
}

impl SvmModel {
    /// Kernel-expansion decision value; its sign is the binary vote.
    pub fn decision(&self, x: &[f64; FEATURES_PER_POSE]) -> f64 {
        let mut sum = self.bias;
        for (sv, coeff) in self.support_vectors.iter().zip(self.coefficients.iter()) {
            sum += coeff * rbf(self.gamma, sv, x);
        }
        sum
    }
}

/// Solver byproducts kept out of the serialized model.
#[derive(Debug, Clone)]
pub struct SvmDiagnostics {
    /// Final maximal KKT violation gap (converged when <= tolerance).
    pub kkt_gap: f64,
    pub iterations: usize,
    /// Dual variables for all training rows, in input order.
    pub alphas: Vec<f64>,
}

pub fn rbf(gamma: f64, a: &[f64; FEATURES_PER_POSE], b: &[f64; FEATURES_PER_POSE]) -> f64 {
    let mut dist = 0.0;
    for k in 0..FEATURES_PER_POSE {
        let d = a[k] - b[k];
        dist += d * d;
    }
    (-gamma * dist).exp()
}

/// Trains on `rows` with labels `y` in {-1, +1}. `tolerance` bounds the
/// final KKT violation gap; `max_passes` bounds the number of pair
/// updates.
pub fn train_svm_binary(
    rows: &[[f64; FEATURES_PER_POSE]],
    y: &[f64],
    c: f64,
    gamma: f64,
    tolerance: f64,
    max_passes: usize,
) -> Result<(SvmModel, SvmDiagnostics), TrainError> {
    let n = rows.len();
    if n != y.len() {
        return Err(TrainError::LengthMismatch {
            rows: n,
            labels: y.len(),
        });
    }
    if c <= 0.0 || gamma <= 0.0 || !c.is_finite() || !gamma.is_finite() {
        return Err(TrainError::BadHyperparameters { c, gamma });
    }
    if y.iter().any(|l| *l != 1.0 && *l != -1.0) {
        return Err(TrainError::NonBinaryLabel);
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(TrainError::SingleClass);
    }
    if rows.iter().any(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(TrainError::NonFiniteFeature);
    }

    // Full kernel matrix: n stays in the low thousands for this pipeline.
    let mut kernel = vec![0.0f64; n * n];
    for i in 0..n {
        kernel[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let k = rbf(gamma, &rows[i], &rows[j]);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let k_at = |i: usize, j: usize| kernel[i * n + j];

    // Dual objective: min 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij,
    // subject to 0 <= a <= C and y'a = 0. Gradient starts at -e.
    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n];

    let in_up = |t: usize, alpha: &[f64]| {
        (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0)
    };
    let in_low = |t: usize, alpha: &[f64]| {
        (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c)
    };

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    while iterations < max_passes {
        // Maximal violating pair.
        let mut i = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(t, &alpha) && v > m_up {
                m_up = v;
                i = t;
            }
            if in_low(t, &alpha) && v < m_low {
                m_low = v;
                j = t;
            }
        }
        gap = m_up - m_low;
        if gap <= tolerance || i == usize::MAX || j == usize::MAX {
            break;
        }
        iterations += 1;

        let (yi, yj) = (y[i], y[j]);
        let old_ai = alpha[i];
        let old_aj = alpha[j];
        let mut quad = k_at(i, i) + k_at(j, j) - 2.0 * yi * yj * k_at(i, j);
        if quad <= 0.0 {
            quad = 1e-12;
        }

        if yi != yj {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        let dai = alpha[i] - old_ai;
        let daj = alpha[j] - old_aj;
        if dai == 0.0 && daj == 0.0 {
            // Numerically stuck pair; the gap check above terminates us on
            // the next sweep if no progress is possible anywhere.
            break;
        }
        for t in 0..n {
            grad[t] += y[t] * yi * k_at(t, i) * dai + y[t] * yj * k_at(t, j) * daj;
        }
    }

    // Bias from the KKT conditions: average of y_t - u_t over free
    // vectors, else the midpoint of the violation bounds.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += -y[t] * grad[t];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(t, &alpha) {
                m_up = m_up.max(v);
            }
            if in_low(t, &alpha) {
                m_low = m_low.min(v);
            }
        }
        0.5 * (m_up + m_low)
    };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(rows[t]);
            coefficients.push(alpha[t] * y[t]);
        }
    }

    Ok((
        SvmModel {
            support_vectors,
            coefficients,
            bias,
            c,
            gamma,
        },
        SvmDiagnostics {
            kkt_gap: gap.max(0.0),
            iterations,
            alphas: alpha,
        },
    ))
}

/// Recomputes the maximal KKT violation gap of a dual solution from
/// scratch, independent of the solver's internal gradient bookkeeping.
pub fn kkt_violation_gap(
    rows: &[[f64; FEATURES_PER_POSE]],
    y: &[f64],
    alphas: &[f64],
    c: f64,
    gamma: f64,
) -> f64 {
    let n = rows.len();
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for t in 0..n {
        let mut u = 0.0;
        for s in 0..n {
            if alphas[s] > 0.0 {
                u += alphas[s] * y[s] * rbf(gamma, &rows[s], &rows[t]);
            }
        }
        let v = y[t] - u;
        if (y[t] > 0.0 && alphas[t] < c) || (y[t] < 0.0 && alphas[t] > 0.0) {
            m_up = m_up.max(v);
        }
        if (y[t] > 0.0 && alphas[t] > 0.0) || (y[t] < 0.0 && alphas[t] < c) {
            m_low = m_low.min(v);
        }
    }
    (m_up - m_low).max(0.0)
}
