//! One-shot kinematic data augmentation.
//!
//! A single posture observation is expanded into a synthetic timeseries by
//! perturbing, per joint, the spherical coordinates of the rotation axis
//! (polar and azimuth, equal variance `sigma_phi_sq`) and the rotation
//! angle (variance `sigma_theta_sq`), all in degrees squared. Working in
//! the spherical axis-angle space keeps every synthetic sample a valid
//! rotation with a unit axis, unlike direct quaternion jitter.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::{PoseVector, FEATURES_PER_POSE};
use crate::rotations::{AxisAngleSpherical, UnitQuaternion};
use crate::seeds;

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("augmentation variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("dictionary labels must be 1..=K with one entry per class; found {0:?}")]
    BadLabels(Vec<usize>),
}

/// Noise-injection settings. Variances are degrees squared, matching the
/// hyperparameter grid the experiments sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentSettings {
    pub sigma_phi_sq: f64,
    pub sigma_theta_sq: f64,
    pub count: usize,
    pub seed: u64,
}

impl AugmentSettings {
    pub fn new(
        sigma_phi_sq: f64,
        sigma_theta_sq: f64,
        count: usize,
        seed: u64,
    ) -> Result<Self, AugmentError> {
        if sigma_phi_sq < 0.0 {
            return Err(AugmentError::NegativeVariance(sigma_phi_sq));
        }
        if sigma_theta_sq < 0.0 {
            return Err(AugmentError::NegativeVariance(sigma_theta_sq));
        }
        if count == 0 {
            return Err(AugmentError::ZeroCount);
        }
        Ok(Self {
            sigma_phi_sq,
            sigma_theta_sq,
            count,
            seed,
        })
    }
}

/// The axis-variance grid swept by both experiments, degrees squared.
pub const GRID_SIGMA_PHI_SQ: [f64; 6] = [20.0, 200.0, 400.0, 600.0, 800.0, 1000.0];
/// The angle-variance grid, degrees squared.
pub const GRID_SIGMA_THETA_SQ: [f64; 6] = [20.0, 100.0, 200.0, 300.0, 400.0, 500.0];

/// One reference observation ("shot") per posture class. Labels are
/// 1-based and consecutive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostureDictionary {
    entries: Vec<(usize, PoseVector)>,
}

impl PostureDictionary {
    pub fn new(entries: Vec<(usize, PoseVector)>) -> Result<Self, AugmentError> {
        let mut labels: Vec<usize> = entries.iter().map(|(label, _)| *label).collect();
        labels.sort_unstable();
        if labels.is_empty() || labels.iter().enumerate().any(|(i, l)| *l != i + 1) {
            return Err(AugmentError::BadLabels(labels));
        }
        Ok(Self { entries })
    }

    pub fn class_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, PoseVector)] {
        &self.entries
    }

    pub fn shot(&self, label: usize) -> Option<&PoseVector> {
        self.entries
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, p)| p)
    }
}

/// Row-major labeled feature matrix produced by augmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDataset {
    pub features: Vec<[f64; FEATURES_PER_POSE]>,
    pub labels: Vec<usize>,
    pub class_count: usize,
    pub settings: AugmentSettings,
}

impl AugmentedDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn rows_of_class(&self, label: usize) -> impl Iterator<Item = &[f64; FEATURES_PER_POSE]> {
        self.features
            .iter()
            .zip(self.labels.iter())
            .filter(move |(_, l)| **l == label)
            .map(|(f, _)| f)
    }
}

/// Adds the sampled noise terms to one joint's spherical axis-angle and
/// re-wraps onto the valid ranges: the azimuth wraps modulo 360, the polar
/// angle reflects at the poles (flipping the azimuth hemisphere), and the
/// rotation angle clamps to [0, 180].
pub fn augment_joint(
    joint: AxisAngleSpherical,
    settings: &AugmentSettings,
    rng: &mut impl Rng,
) -> AxisAngleSpherical {
    let axis_noise = Normal::new(0.0, settings.sigma_phi_sq.sqrt()).expect("validated variance");
    let angle_noise = Normal::new(0.0, settings.sigma_theta_sq.sqrt()).expect("validated variance");
    let mut polar = joint.polar_deg() + axis_noise.sample(rng);
    let mut azimuth = joint.azimuth_deg() + axis_noise.sample(rng);
    let angle = joint.angle_deg() + angle_noise.sample(rng);

    loop {
        if polar < 0.0 {
            polar = -polar;
            azimuth += 180.0;
        } else if polar > 180.0 {
            polar = 360.0 - polar;
            azimuth += 180.0;
        } else {
            break;
        }
    }
    azimuth = azimuth.rem_euclid(360.0);
    if azimuth >= 360.0 {
        azimuth = 0.0;
    }

    AxisAngleSpherical::new(polar, azimuth, angle.clamp(0.0, 180.0))
}

fn augment_pose_features(
    shot: &PoseVector,
    settings: &AugmentSettings,
    rng: &mut impl Rng,
) -> [f64; FEATURES_PER_POSE] {
    let mut row = [0.0; FEATURES_PER_POSE];
    for (j, quat) in shot.joints().iter().enumerate() {
        let spherical = quat.to_axis_angle().to_spherical();
        let noised = augment_joint(spherical, settings, rng).to_cartesian();
        row[4 * j..4 * j + 3].copy_from_slice(&noised.axis());
        row[4 * j + 3] = noised.angle();
    }
    row
}

/// Expands one shot into `settings.count` feature rows. The first row is
/// the unmodified shot; the remaining rows perturb all four joints
/// independently.
pub fn augment_posture(
    shot: &PoseVector,
    settings: &AugmentSettings,
    rng: &mut impl Rng,
) -> Vec<[f64; FEATURES_PER_POSE]> {
    let mut rows = Vec::with_capacity(settings.count);
    rows.push(shot.to_features());
    for _ in 1..settings.count {
        rows.push(augment_pose_features(shot, settings, rng));
    }
    rows
}

/// Augments every class of the dictionary. Each class draws from its own
/// seed stream derived from `settings.seed` and the class label, so class
/// generation parallelizes without affecting the output.
pub fn build_training_dictionary(
    dict: &PostureDictionary,
    settings: &AugmentSettings,
) -> AugmentedDataset {
    let per_class: Vec<(usize, Vec<[f64; FEATURES_PER_POSE]>)> = dict
        .entries()
        .par_iter()
        .map(|(label, shot)| {
            let mut rng = seeds::rng(settings.seed, "augment-class", *label as u64);
            (*label, augment_posture(shot, settings, &mut rng))
        })
        .collect();

    let mut features = Vec::with_capacity(dict.class_count() * settings.count);
    let mut labels = Vec::with_capacity(dict.class_count() * settings.count);
    for (label, rows) in per_class {
        labels.extend(std::iter::repeat_n(label, rows.len()));
        features.extend(rows);
    }
    AugmentedDataset {
        features,
        labels,
        class_count: dict.class_count(),
        settings: *settings,
    }
}

/// Sidecar manifest written next to every dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub settings: AugmentSettings,
    pub class_count: usize,
    pub rows: usize,
    pub provenance: String,
}

pub const DATASET_CSV_HEADER: &str = "label,j1_ax,j1_ay,j1_az,j1_theta,j2_ax,j2_ay,j2_az,j2_theta,j3_ax,j3_ay,j3_az,j3_theta,j4_ax,j4_ay,j4_az,j4_theta";

/// Serializes rows with shortest-round-trip float formatting, so a
/// re-parse reproduces the dataset bit-exactly.
pub fn dataset_to_csv(dataset: &AugmentedDataset) -> String {
    let mut out = String::from(DATASET_CSV_HEADER);
    out.push('\n');
    for (row, label) in dataset.features.iter().zip(dataset.labels.iter()) {
        out.push_str(&label.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum DatasetCsvError {
    #[error("line 1: expected dataset header")]
    BadHeader,
    #[error("line {line}: expected 17 fields, found {found}")]
    Arity { line: usize, found: usize },
    #[error("line {line}: `{token}` is not a number")]
    BadNumber { line: usize, token: String },
    #[error("no data rows")]
    Empty,
}

pub fn dataset_from_csv(
    text: &str,
    manifest: &DatasetManifest,
) -> Result<AugmentedDataset, DatasetCsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == DATASET_CSV_HEADER => {}
        _ => return Err(DatasetCsvError::BadHeader),
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 1 + FEATURES_PER_POSE {
            return Err(DatasetCsvError::Arity {
                line,
                found: fields.len(),
            });
        }
        let label = fields[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| DatasetCsvError::BadNumber {
                line,
                token: fields[0].to_string(),
            })?;
        let mut row = [0.0; FEATURES_PER_POSE];
        for (k, token) in fields[1..].iter().enumerate() {
            row[k] = token
                .trim()
                .parse::<f64>()
                .map_err(|_| DatasetCsvError::BadNumber {
                    line,
                    token: token.to_string(),
                })?;
        }
        features.push(row);
        labels.push(label);
    }
    if features.is_empty() {
        return Err(DatasetCsvError::Empty);
    }
    Ok(AugmentedDataset {
        features,
        labels,
        class_count: manifest.class_count,
        settings: manifest.settings,
    })
}

/// Direct Gaussian jitter of quaternion components followed by
/// renormalization: the baseline augmentation whose injected angle spread
/// does not track the requested sigma. Kept for comparative diagnostics.
pub fn naive_quaternion_noise(
    q: UnitQuaternion,
    sigma: f64,
    rng: &mut impl Rng,
) -> UnitQuaternion {
    let noise = Normal::new(0.0, sigma).expect("non-negative sigma");
    UnitQuaternion::new(
        q.w() + noise.sample(rng),
        q.x() + noise.sample(rng),
        q.y() + noise.sample(rng),
        q.z() + noise.sample(rng),
    )
}
