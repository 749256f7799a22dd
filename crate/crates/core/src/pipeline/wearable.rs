//! The wearable experiment: fuse and synchronize raw dual-IMU session
//! logs, pick one seeded shot per training posture, augment, train, and
//! evaluate against the NaN-padded matrix of real (or synthesized) test
//! recordings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::virtual_run::make_strategy;
use super::{Aggregate, PipelineConfig, PipelineError};
use crate::augment::{
    build_training_dictionary, AugmentSettings, AugmentedDataset, PostureDictionary,
};
use crate::classifier::{ecoc_predict, train_ecoc, tune_hyperparameters};
use crate::fusion::{
    build_test_matrix, estimate_stream_orientation, fuse_module, synchronize_streams,
    OrientationSample, PoseSeries, SensorModuleStream, TestMatrix,
};
use crate::metrics::{
    accuracy, f1_report, mean_features, one_vs_all_similarity, similarity_matrix, ConfusionMatrix,
    SimilarityScore,
};
use crate::pose::{JointId, FEATURES_PER_POSE, JOINT_COUNT};
use crate::rotations::UnitQuaternion;
use crate::seeds;

/// One session after fusion, synchronization and warm-up trimming.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedRecording {
    pub label: usize,
    pub series: PoseSeries,
}

impl ProcessedRecording {
    pub fn feature_rows(&self) -> Vec<[f64; FEATURES_PER_POSE]> {
        self.series.poses.iter().map(|p| p.to_features()).collect()
    }
}

/// Filters and fuses one session's four module streams into a unified
/// pose timeseries, then drops the configured warm-up window.
pub fn process_session(
    label: usize,
    streams: &[SensorModuleStream],
    config: &PipelineConfig,
) -> Result<ProcessedRecording, PipelineError> {
    let tolerance_us = (0.5e6 / config.rate_hz).round() as i64;
    let mut channels: [Vec<OrientationSample>; JOINT_COUNT] = Default::default();
    for joint in JointId::ALL {
        let stream = streams
            .iter()
            .find(|s| s.module_id == joint)
            .ok_or(PipelineError::MissingModule {
                label,
                module: joint.code(),
            })?;
        let (parent, _) = estimate_stream_orientation(
            &stream.parent,
            config.beta,
            UnitQuaternion::identity(),
            config.rate_hz,
        )?;
        let (child, _) = estimate_stream_orientation(
            &stream.child,
            config.beta,
            UnitQuaternion::identity(),
            config.rate_hz,
        )?;
        let (fused, _) = fuse_module(&parent, &child, tolerance_us)?;
        channels[joint.index()] = fused;
    }
    let series = synchronize_streams(&channels, config.rate_hz)?;

    let start = *series.timestamps_us.first().expect("non-empty series");
    let cutoff = start + (config.warm_up_seconds * 1e6).round() as i64;
    let keep: Vec<usize> = series
        .timestamps_us
        .iter()
        .enumerate()
        .filter(|(_, t)| **t >= cutoff)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(PipelineError::EmptyAfterWarmUp {
            label,
            seconds: config.warm_up_seconds,
        });
    }
    Ok(ProcessedRecording {
        label,
        series: PoseSeries {
            timestamps_us: keep.iter().map(|i| series.timestamps_us[*i]).collect(),
            poses: keep.iter().map(|i| series.poses[*i]).collect(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WearableRepeat {
    pub repeat: usize,
    pub shot_seed: u64,
    /// (class label, chosen sample index) per training recording.
    pub shots: Vec<(usize, usize)>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WearableCellReport {
    pub sigma_phi_sq: f64,
    pub sigma_theta_sq: f64,
    pub tuned_c: f64,
    pub tuned_gamma: f64,
    pub repeats: Vec<WearableRepeat>,
    pub macro_f1: Aggregate,
    pub accuracy: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WearableRunReport {
    pub config: PipelineConfig,
    /// False in `--no-augment` baseline mode (training on the full raw
    /// timeseries instead of augmented shots).
    pub augmented: bool,
    pub cells: Vec<WearableCellReport>,
    /// Confusion of the last cell's last repeat (row = true class).
    pub confusion: Vec<Vec<usize>>,
    pub confusion_row_norm: Vec<Vec<f64>>,
    pub timing_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneVsAllReport {
    pub test_label: usize,
    pub scores: Vec<SimilarityScore>,
}

/// Run results plus the similarity analyses computed from the final
/// trained configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct WearableOutputs {
    pub report: WearableRunReport,
    pub similarity: Vec<Vec<f64>>,
    pub one_vs_all: Vec<OneVsAllReport>,
    pub test_matrix: TestMatrix,
    pub final_train: AugmentedDataset,
}

fn class_count_of(recordings: &[ProcessedRecording]) -> usize {
    recordings.iter().map(|r| r.label).max().unwrap_or(0)
}

/// Baseline training set: every post-warm-up sample of every training
/// recording, no augmentation.
fn raw_training_dataset(
    recordings: &[ProcessedRecording],
    class_count: usize,
) -> AugmentedDataset {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for recording in recordings {
        for row in recording.feature_rows() {
            features.push(row);
            labels.push(recording.label);
        }
    }
    let count = features.len().max(1);
    AugmentedDataset {
        features,
        labels,
        class_count,
        settings: AugmentSettings::new(0.0, 0.0, count, 0).expect("valid sentinel settings"),
    }
}

/// Runs the wearable protocol over the configured noise cells and repeat
/// count. `train`/`test` are processed recordings, one or more per class;
/// classes must be 1..=K across the training set.
pub fn run_wearable(
    config: &PipelineConfig,
    train: &[ProcessedRecording],
    test: &[ProcessedRecording],
    augmented: bool,
) -> Result<WearableOutputs, PipelineError> {
    config.validate()?;
    let started = std::time::Instant::now();
    let class_count = class_count_of(train);

    let test_matrix = build_test_matrix(
        test.iter()
            .map(|r| (r.label, r.feature_rows()))
            .collect(),
    )?;
    let test_entries = test_matrix.valid_entries();
    let test_labels: Vec<usize> = test_entries.iter().map(|(_, l)| *l).collect();

    let cells = config.augmentation.cells();
    let mut cell_reports = Vec::with_capacity(cells.len());
    let mut final_model_artifacts: Option<(AugmentedDataset, Vec<usize>)> = None;

    for (cell, sigma) in cells.iter().enumerate() {
        // Build per-repeat training datasets first (cheap), tune on the
        // first, then train/evaluate the repeats in parallel.
        let mut datasets = Vec::with_capacity(config.repeats);
        let mut shot_logs = Vec::with_capacity(config.repeats);
        for repeat in 0..config.repeats {
            let shot_seed = seeds::derive(
                config.seed,
                "wearable-shot",
                (cell * config.repeats + repeat) as u64,
            );
            if augmented {
                let (dict, shots) = select_shots(train, class_count, shot_seed)?;
                let settings = AugmentSettings::new(
                    sigma.0,
                    sigma.1,
                    config.wearable_train_count,
                    seeds::derive(
                        config.seed,
                        "wearable-augment",
                        (cell * config.repeats + repeat) as u64,
                    ),
                )?;
                datasets.push(build_training_dictionary(&dict, &settings));
                shot_logs.push((shot_seed, shots));
            } else {
                datasets.push(raw_training_dataset(train, class_count));
                shot_logs.push((shot_seed, Vec::new()));
            }
        }

        let (c, gamma) = tune_on_dataset(config, &datasets[0], cell)?;

        let repeats: Result<Vec<(WearableRepeat, Vec<usize>)>, PipelineError> = datasets
            .par_iter()
            .enumerate()
            .map(|(repeat, dataset)| {
                let model = train_ecoc(dataset, c, gamma, &config.solver)?;
                let preds: Vec<usize> = test_entries
                    .iter()
                    .map(|(row, _)| ecoc_predict(&model, row).0)
                    .collect();
                let report = f1_report(&preds, &test_labels, class_count)?;
                let (shot_seed, shots) = shot_logs[repeat].clone();
                Ok((
                    WearableRepeat {
                        repeat,
                        shot_seed,
                        shots,
                        accuracy: accuracy(&preds, &test_labels)?,
                        macro_f1: report.macro_f1,
                        per_class_f1: report.per_class,
                    },
                    preds,
                ))
            })
            .collect();
        let repeats = repeats?;
        let last_preds = repeats.last().expect("repeats >= 1").1.clone();
        let repeats: Vec<WearableRepeat> = repeats.into_iter().map(|(r, _)| r).collect();

        let f1_values: Vec<f64> = repeats.iter().map(|r| r.macro_f1).collect();
        let acc_values: Vec<f64> = repeats.iter().map(|r| r.accuracy).collect();
        cell_reports.push(WearableCellReport {
            sigma_phi_sq: sigma.0,
            sigma_theta_sq: sigma.1,
            tuned_c: c,
            tuned_gamma: gamma,
            repeats,
            macro_f1: Aggregate::from_values(&f1_values),
            accuracy: Aggregate::from_values(&acc_values),
        });
        final_model_artifacts = Some((datasets.pop().expect("repeats >= 1"), last_preds));
    }

    let (final_train, final_preds) = final_model_artifacts.expect("at least one cell");
    let confusion = ConfusionMatrix::new(&final_preds, &test_labels, class_count)?;

    let train_rows: Vec<([f64; FEATURES_PER_POSE], usize)> = final_train
        .features
        .iter()
        .zip(final_train.labels.iter())
        .map(|(f, l)| (*f, *l))
        .collect();
    let similarity = similarity_matrix(
        &test_entries,
        &train_rows,
        class_count,
        100_000,
        seeds::derive(config.seed, "similarity", 0),
    )?;

    let mut one_vs_all = Vec::new();
    for block in test_matrix.blocks() {
        let rows: Vec<[f64; FEATURES_PER_POSE]> = block.rows.clone();
        let test_mean = mean_features(&rows);
        one_vs_all.push(OneVsAllReport {
            test_label: block.label,
            scores: one_vs_all_similarity(&test_mean, &final_train)?,
        });
    }

    Ok(WearableOutputs {
        report: WearableRunReport {
            config: config.clone(),
            augmented,
            cells: cell_reports,
            confusion: confusion.counts().clone(),
            confusion_row_norm: confusion.row_normalized(),
            timing_seconds: started.elapsed().as_secs_f64(),
        },
        similarity,
        one_vs_all,
        test_matrix,
        final_train,
    })
}

/// One seeded shot per class: for each label, a uniformly drawn sample of
/// the concatenated recordings of that label.
fn select_shots(
    recordings: &[ProcessedRecording],
    class_count: usize,
    shot_seed: u64,
) -> Result<(PostureDictionary, Vec<(usize, usize)>), PipelineError> {
    use rand::Rng;
    let mut entries = Vec::with_capacity(class_count);
    let mut log = Vec::with_capacity(class_count);
    for label in 1..=class_count {
        let poses: Vec<_> = recordings
            .iter()
            .filter(|r| r.label == label)
            .flat_map(|r| r.series.poses.iter().copied())
            .collect();
        if poses.is_empty() {
            return Err(PipelineError::Fusion(
                crate::fusion::FusionError::ZeroLengthRecording { label },
            ));
        }
        let mut rng = seeds::rng(shot_seed, "shot-class", label as u64);
        let index = rng.gen_range(0..poses.len());
        entries.push((label, poses[index]));
        log.push((label, index));
    }
    Ok((PostureDictionary::new(entries)?, log))
}

fn tune_on_dataset(
    config: &PipelineConfig,
    dataset: &AugmentedDataset,
    cell: usize,
) -> Result<(f64, f64), PipelineError> {
    let tuning_set = match config.search.subsample_per_class {
        Some(cap) => subsample_per_class(dataset, cap),
        None => dataset.clone(),
    };
    let mut strategy = make_strategy(
        config.search.strategy,
        seeds::derive(config.seed, "wearable-strategy", cell as u64),
    );
    let result = tune_hyperparameters(
        &tuning_set,
        config.search.budget,
        strategy.as_mut(),
        &config.solver,
        seeds::derive(config.seed, "wearable-tune-split", cell as u64),
    )?;
    Ok((result.c, result.gamma))
}

/// Deterministic per-class row cap: keeps the first `cap` rows of each
/// class in dataset order.
fn subsample_per_class(dataset: &AugmentedDataset, cap: usize) -> AugmentedDataset {
    let mut taken = vec![0usize; dataset.class_count + 1];
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, label) in dataset.features.iter().zip(dataset.labels.iter()) {
        if taken[*label] < cap {
            taken[*label] += 1;
            features.push(*row);
            labels.push(*label);
        }
    }
    AugmentedDataset {
        features,
        labels,
        class_count: dataset.class_count,
        settings: dataset.settings,
    }
}
