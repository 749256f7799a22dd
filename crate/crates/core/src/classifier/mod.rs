//! Multi-class posture classification: one-vs-one ECOC over Gaussian-kernel
//! SVM binaries with Hamming-distance decoding.

mod svm;
mod tune;

pub use svm::{
    kkt_violation_gap, rbf, train_svm_binary, SvmDiagnostics, SvmModel, DEFAULT_MAX_PASSES,
    DEFAULT_TOLERANCE,
};
pub use tune::{tune_hyperparameters, RandomSearch, SearchStrategy, SurrogateSearch, TuneResult};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::AugmentedDataset;
use crate::pose::FEATURES_PER_POSE;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("class {0} has no training rows")]
    MissingClass(usize),
    #[error("row/label length mismatch: {rows} rows, {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("labels must be -1 or +1 for binary training")]
    NonBinaryLabel,
    #[error("binary training set contains a single class")]
    SingleClass,
    #[error("non-finite feature value")]
    NonFiniteFeature,
    #[error("hyperparameters must be positive, got C={c}, gamma={gamma}")]
    BadHyperparameters { c: f64, gamma: f64 },
    #[error("model schema version {found} unsupported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("model deserialization failed: {0}")]
    BadModel(String),
}

/// One-vs-one encoding matrix: one column per unordered class pair, +1 for
/// the lower class index, -1 for the higher, 0 elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingMatrix {
    class_count: usize,
    columns: Vec<(usize, usize)>,
}

impl EncodingMatrix {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    /// The (positive, negative) class labels of one column.
    pub fn column(&self, i: usize) -> (usize, usize) {
        self.columns[i]
    }

    /// Entry for 1-based class label `class` and column `i`.
    pub fn entry(&self, class: usize, i: usize) -> i8 {
        let (pos, neg) = self.columns[i];
        if class == pos {
            1
        } else if class == neg {
            -1
        } else {
            0
        }
    }
}

/// All class pairs in deterministic order (1,2), (1,3), ..., (K-1,K).
pub fn build_ovo_encoding(class_count: usize) -> Result<EncodingMatrix, TrainError> {
    if class_count < 2 {
        return Err(TrainError::TooFewClasses(class_count));
    }
    let mut columns = Vec::with_capacity(class_count * (class_count - 1) / 2);
    for a in 1..=class_count {
        for b in (a + 1)..=class_count {
            columns.push((a, b));
        }
    }
    Ok(EncodingMatrix {
        class_count,
        columns,
    })
}

/// Per-dimension z-score parameters fit on training data only. Dimensions
/// with (near-)zero spread pass through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: [f64; FEATURES_PER_POSE],
    pub scale: [f64; FEATURES_PER_POSE],
}

impl Normalization {
    pub fn fit(rows: &[[f64; FEATURES_PER_POSE]]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = [0.0; FEATURES_PER_POSE];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row.iter()) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = [0.0; FEATURES_PER_POSE];
        for row in rows {
            for k in 0..FEATURES_PER_POSE {
                let d = row[k] - mean[k];
                var[k] += d * d;
            }
        }
        let mut scale = [1.0; FEATURES_PER_POSE];
        for k in 0..FEATURES_PER_POSE {
            let std = (var[k] / n).sqrt();
            if std > 1e-12 {
                scale[k] = std;
            }
        }
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64; FEATURES_PER_POSE]) -> [f64; FEATURES_PER_POSE] {
        let mut out = [0.0; FEATURES_PER_POSE];
        for k in 0..FEATURES_PER_POSE {
            out[k] = (x[k] - self.mean[k]) / self.scale[k];
        }
        out
    }
}

const MODEL_SCHEMA_VERSION: u32 = 1;

/// Trained multi-class model: encoding matrix, one binary SVM per column,
/// and the feature normalization fitted on the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcocModel {
    pub schema_version: u32,
    pub class_count: usize,
    pub normalization: Normalization,
    pub encoding: EncodingMatrix,
    pub binaries: Vec<SvmModel>,
}

/// Solver settings for the full ECOC training pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_passes: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

/// Trains one binary per encoding column on the rows of its two member
/// classes. Columns train independently (and in parallel); the assembled
/// model is deterministic for fixed inputs.
pub fn train_ecoc(
    dataset: &AugmentedDataset,
    c: f64,
    gamma: f64,
    solver: &SolverSettings,
) -> Result<EcocModel, TrainError> {
    let class_count = dataset.class_count;
    let encoding = build_ovo_encoding(class_count)?;
    for label in 1..=class_count {
        if !dataset.labels.contains(&label) {
            return Err(TrainError::MissingClass(label));
        }
    }

    let normalization = Normalization::fit(&dataset.features);
    let normalized: Vec<[f64; FEATURES_PER_POSE]> = dataset
        .features
        .iter()
        .map(|row| normalization.apply(row))
        .collect();

    let binaries: Result<Vec<SvmModel>, TrainError> = (0..encoding.column_count())
        .into_par_iter()
        .map(|i| {
            let (pos, neg) = encoding.column(i);
            let mut rows = Vec::new();
            let mut y = Vec::new();
            for (row, label) in normalized.iter().zip(dataset.labels.iter()) {
                if *label == pos {
                    rows.push(*row);
                    y.push(1.0);
                } else if *label == neg {
                    rows.push(*row);
                    y.push(-1.0);
                }
            }
            train_svm_binary(&rows, &y, c, gamma, solver.tolerance, solver.max_passes)
                .map(|(model, _)| model)
        })
        .collect();

    Ok(EcocModel {
        schema_version: MODEL_SCHEMA_VERSION,
        class_count,
        normalization,
        encoding,
        binaries: binaries?,
    })
}

/// Per-class Hamming losses, each in [0, 1]: `(1/2L) * sum_i
/// (1 - sgn(m_j^i * f_i(x)))`. Zero encoding entries contribute a fixed
/// loss of 1/2 per the `sgn(0) = 0` convention; an exactly zero decision
/// value counts as -1.
pub fn ecoc_losses(model: &EcocModel, x: &[f64; FEATURES_PER_POSE]) -> Vec<f64> {
    let normalized = model.normalization.apply(x);
    let decisions: Vec<f64> = model
        .binaries
        .iter()
        .map(|b| b.decision(&normalized))
        .collect();
    let l = model.encoding.column_count() as f64;
    (1..=model.class_count)
        .map(|class| {
            let mut sum = 0.0;
            for (i, f) in decisions.iter().enumerate() {
                let m = model.encoding.entry(class, i);
                let s = if m == 0 {
                    0.0
                } else if (f64::from(m) * f) > 0.0 {
                    1.0
                } else {
                    -1.0
                };
                sum += 1.0 - s;
            }
            sum / (2.0 * l)
        })
        .collect()
}

/// Label minimizing the Hamming loss; ties break to the lowest class
/// index. Also returns the per-class losses.
pub fn ecoc_predict(model: &EcocModel, x: &[f64; FEATURES_PER_POSE]) -> (usize, Vec<f64>) {
    let losses = ecoc_losses(model, x);
    let mut best = 0usize;
    for (idx, loss) in losses.iter().enumerate() {
        if *loss < losses[best] {
            best = idx;
        }
    }
    (best + 1, losses)
}

pub fn model_to_json(model: &EcocModel) -> String {
    serde_json::to_string_pretty(model).expect("model serialization cannot fail")
}

pub fn model_from_json(text: &str) -> Result<EcocModel, TrainError> {
    let model: EcocModel =
        serde_json::from_str(text).map_err(|e| TrainError::BadModel(e.to_string()))?;
    if model.schema_version != MODEL_SCHEMA_VERSION {
        return Err(TrainError::SchemaVersion {
            found: model.schema_version,
            expected: MODEL_SCHEMA_VERSION,
        });
    }
    Ok(model)
}
