//! Classification metrics and the hybrid axis/angle posture similarity.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::AugmentedDataset;
use crate::pose::{FEATURES_PER_POSE, JOINT_COUNT};
use crate::rotations::vec3;
use crate::seeds;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no valid prediction/label pairs to evaluate")]
    Empty,
    #[error("prediction/label length mismatch: {preds} vs {labels}")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("label {value} outside 1..={k}")]
    LabelOutOfRange { value: usize, k: usize },
    #[error("joint {joint} axis in similarity input is not unit length (norm {norm})")]
    NonUnitAxis { joint: usize, norm: f64 },
    #[error("joint {joint} angle {angle} outside [0, pi]")]
    AngleOutOfRange { joint: usize, angle: f64 },
    #[error("class {0} has no rows")]
    EmptyClassBlock(usize),
}

/// Fraction of correct predictions. Inputs are the already-unmasked pairs;
/// padding rows never reach this function.
pub fn accuracy(preds: &[usize], labels: &[usize]) -> Result<f64, MetricsError> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let correct = preds
        .iter()
        .zip(labels.iter())
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / preds.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub macro_f1: f64,
    pub per_class: Vec<f64>,
    /// Classes scoring 0 by the zero-division convention (no true
    /// positives and no presence in either truth or prediction).
    pub degenerate_classes: Vec<usize>,
}

/// Unweighted mean over classes of `2PR / (P + R)`, computed as
/// `2TP / (2TP + FP + FN)`. Classes with an undefined score contribute 0
/// and are flagged.
pub fn f1_report(preds: &[usize], labels: &[usize], k: usize) -> Result<F1Report, MetricsError> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    for v in preds.iter().chain(labels.iter()) {
        if *v < 1 || *v > k {
            return Err(MetricsError::LabelOutOfRange { value: *v, k });
        }
    }
    let mut tp = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut fn_ = vec![0usize; k];
    for (p, l) in preds.iter().zip(labels.iter()) {
        if p == l {
            tp[p - 1] += 1;
        } else {
            fp[p - 1] += 1;
            fn_[l - 1] += 1;
        }
    }
    let mut per_class = Vec::with_capacity(k);
    let mut degenerate = Vec::new();
    for c in 0..k {
        let denom = 2 * tp[c] + fp[c] + fn_[c];
        if denom == 0 {
            per_class.push(0.0);
            degenerate.push(c + 1);
        } else {
            per_class.push(2.0 * tp[c] as f64 / denom as f64);
        }
    }
    Ok(F1Report {
        macro_f1: per_class.iter().sum::<f64>() / k as f64,
        per_class,
        degenerate_classes: degenerate,
    })
}

/// Convenience wrapper; panics on invalid input (callers that evaluate
/// user-supplied files go through [`f1_report`]).
pub fn macro_f1(preds: &[usize], labels: &[usize], k: usize) -> f64 {
    f1_report(preds, labels, k)
        .expect("macro_f1 requires non-empty, in-range inputs")
        .macro_f1
}

/// Rows are true classes, columns predicted classes, 1-based labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(preds: &[usize], labels: &[usize], k: usize) -> Result<Self, MetricsError> {
        if preds.len() != labels.len() {
            return Err(MetricsError::LengthMismatch {
                preds: preds.len(),
                labels: labels.len(),
            });
        }
        for v in preds.iter().chain(labels.iter()) {
            if *v < 1 || *v > k {
                return Err(MetricsError::LabelOutOfRange { value: *v, k });
            }
        }
        let mut counts = vec![vec![0usize; k]; k];
        for (p, l) in preds.iter().zip(labels.iter()) {
            counts[l - 1][p - 1] += 1;
        }
        Ok(Self { k, counts })
    }

    pub fn counts(&self) -> &Vec<Vec<usize>> {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Per-row proportions. Rows with zero support stay all-zero and are
    /// reported by [`ConfusionMatrix::unsupported_rows`].
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                if total == 0 {
                    vec![0.0; self.k]
                } else {
                    row.iter().map(|c| *c as f64 / total as f64).collect()
                }
            })
            .collect()
    }

    pub fn unsupported_rows(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, row)| row.iter().sum::<usize>() == 0)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Hybrid similarity between two posture feature vectors: the sum of the
/// four axis dot products (`lambda_phi`, in [-4, 4]) and the normalized
/// total angle agreement (`lambda_theta = (4pi - sum |dtheta|) / pi`, in
/// [0, 4]). Full score 8 iff the feature vectors coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub lambda_phi: f64,
    pub lambda_theta: f64,
    pub lambda: f64,
}

fn validate_features(x: &[f64; FEATURES_PER_POSE]) -> Result<(), MetricsError> {
    for j in 0..JOINT_COUNT {
        let axis = [x[4 * j], x[4 * j + 1], x[4 * j + 2]];
        let norm = vec3::norm(axis);
        if (norm - 1.0).abs() > 1e-6 {
            return Err(MetricsError::NonUnitAxis { joint: j, norm });
        }
        let angle = x[4 * j + 3];
        if !(-1e-9..=std::f64::consts::PI + 1e-9).contains(&angle) {
            return Err(MetricsError::AngleOutOfRange { joint: j, angle });
        }
    }
    Ok(())
}

pub fn lambda_similarity(
    a: &[f64; FEATURES_PER_POSE],
    b: &[f64; FEATURES_PER_POSE],
) -> Result<SimilarityScore, MetricsError> {
    validate_features(a)?;
    validate_features(b)?;
    let mut lambda_phi = 0.0;
    let mut angle_error = 0.0;
    for j in 0..JOINT_COUNT {
        lambda_phi += a[4 * j] * b[4 * j] + a[4 * j + 1] * b[4 * j + 1] + a[4 * j + 2] * b[4 * j + 2];
        angle_error += (a[4 * j + 3] - b[4 * j + 3]).abs();
    }
    let lambda_theta = (4.0 * std::f64::consts::PI - angle_error) / std::f64::consts::PI;
    Ok(SimilarityScore {
        lambda_phi,
        lambda_theta,
        lambda: lambda_phi + lambda_theta,
    })
}

/// Time-domain mean of feature rows: per-joint mean axis re-normalized to
/// unit length, scalar mean of the angles.
pub fn mean_features(rows: &[[f64; FEATURES_PER_POSE]]) -> [f64; FEATURES_PER_POSE] {
    assert!(!rows.is_empty(), "mean of zero feature rows");
    let mut out = [0.0; FEATURES_PER_POSE];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row.iter()) {
            *o += v;
        }
    }
    let n = rows.len() as f64;
    for j in 0..JOINT_COUNT {
        let axis = vec3::normalize([out[4 * j], out[4 * j + 1], out[4 * j + 2]]);
        out[4 * j..4 * j + 3].copy_from_slice(&axis);
        out[4 * j + 3] /= n;
    }
    out
}

/// Mean pairwise similarity between class blocks of two labeled row sets:
/// entry `(a, b)` is the mean lambda over (row of class a in `test`, row
/// of class b in `train`) pairs. Cells whose cross product exceeds
/// `pair_cap` are subsampled with the seeded RNG.
pub fn similarity_matrix(
    test: &[([f64; FEATURES_PER_POSE], usize)],
    train: &[([f64; FEATURES_PER_POSE], usize)],
    k: usize,
    pair_cap: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, MetricsError> {
    let mut test_by_class: Vec<Vec<&[f64; FEATURES_PER_POSE]>> = vec![Vec::new(); k];
    for (row, label) in test {
        if *label < 1 || *label > k {
            return Err(MetricsError::LabelOutOfRange { value: *label, k });
        }
        test_by_class[label - 1].push(row);
    }
    let mut train_by_class: Vec<Vec<&[f64; FEATURES_PER_POSE]>> = vec![Vec::new(); k];
    for (row, label) in train {
        if *label < 1 || *label > k {
            return Err(MetricsError::LabelOutOfRange { value: *label, k });
        }
        train_by_class[label - 1].push(row);
    }
    for (c, rows) in test_by_class.iter().enumerate() {
        if rows.is_empty() {
            return Err(MetricsError::EmptyClassBlock(c + 1));
        }
    }
    for (c, rows) in train_by_class.iter().enumerate() {
        if rows.is_empty() {
            return Err(MetricsError::EmptyClassBlock(c + 1));
        }
    }

    let mut matrix = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let rows_a = &test_by_class[a];
            let rows_b = &train_by_class[b];
            let full = rows_a.len() * rows_b.len();
            let mut rng = seeds::rng(seed, "similarity-cell", (a * k + b) as u64);
            let mut sum = 0.0;
            let count = full.min(pair_cap);
            if full <= pair_cap {
                for ra in rows_a {
                    for rb in rows_b.iter() {
                        sum += lambda_similarity(ra, rb)?.lambda;
                    }
                }
            } else {
                for _ in 0..count {
                    let ra = rows_a[rng.gen_range(0..rows_a.len())];
                    let rb = rows_b[rng.gen_range(0..rows_b.len())];
                    sum += lambda_similarity(ra, rb)?.lambda;
                }
            }
            matrix[a][b] = sum / count as f64;
        }
    }
    Ok(matrix)
}

/// Similarity of one recording's mean features against every class's
/// training mean, in class order.
pub fn one_vs_all_similarity(
    test_mean: &[f64; FEATURES_PER_POSE],
    train: &AugmentedDataset,
) -> Result<Vec<SimilarityScore>, MetricsError> {
    let mut out = Vec::with_capacity(train.class_count);
    for class in 1..=train.class_count {
        let rows: Vec<[f64; FEATURES_PER_POSE]> = train.rows_of_class(class).copied().collect();
        if rows.is_empty() {
            return Err(MetricsError::EmptyClassBlock(class));
        }
        let class_mean = mean_features(&rows);
        out.push(lambda_similarity(test_mean, &class_mean)?);
    }
    Ok(out)
}
