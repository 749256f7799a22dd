use std::path::Path;

use posture_core::augment::{
    build_training_dictionary, dataset_from_csv, dataset_to_csv, AugmentSettings,
    AugmentedDataset, DatasetManifest,
};
use posture_core::classifier::{
    ecoc_predict, model_from_json, model_to_json, train_ecoc, tune_hyperparameters,
};
use posture_core::fusion::{
    estimate_stream_orientation, fuse_module, read_imu_csv, write_orientation_csv,
};
use posture_core::metrics::{
    accuracy, f1_report, lambda_similarity, mean_features, similarity_matrix, ConfusionMatrix,
};
use posture_core::pipeline::{
    self, export_features_csv, process_session, virtual_heatmap_csv, AugmentationPlan,
    PipelineConfig, ProcessedRecording, SessionsManifest, Split,
};
use posture_core::pose::FEATURES_PER_POSE;
use posture_core::synth::CanonicalPostureSet;
use posture_core::UnitQuaternion;

use crate::output::{read_to_string, OutputDir};
use crate::{CliError, CommonArgs};

fn load_config(common: &CommonArgs) -> Result<PipelineConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::from_json(&read_to_string(path)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        // One command per process; a failure here only means a pool was
        // already installed, which keeps the run valid.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    Ok(config)
}

pub fn simulate(common: &CommonArgs, imu: bool) -> Result<(), CliError> {
    let config = load_config(common)?;
    let artifacts = pipeline::simulate(&config, imu)?;
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write("motion.bvh", &artifacts.bvh_text)?;
    out.write("postures.json", &artifacts.posture_manifest_json)?;
    if let Some((manifest, files)) = &artifacts.sessions {
        for (name, contents) in files {
            out.write(&format!("sessions/{name}"), contents)?;
        }
        let manifest_json = serde_json::to_string_pretty(manifest)
            .expect("manifest serialization cannot fail");
        out.write("sessions/sessions.json", &manifest_json)?;
    }
    out.finish("simulate", &config.to_json())
}

pub fn run_virtual(common: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(common)?;
    let report = pipeline::run_virtual(&config)?;
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write(
        "virtual_report.json",
        &serde_json::to_string_pretty(&report).expect("report serialization cannot fail"),
    )?;
    out.write("virtual_heatmap.csv", &virtual_heatmap_csv(&report))?;
    for cell in &report.cells {
        println!(
            "({}, {}): macro-F1 {:.4} +/- {:.4}, accuracy {:.4} +/- {:.4}",
            cell.sigma_phi_sq,
            cell.sigma_theta_sq,
            cell.macro_f1.mean,
            cell.macro_f1.std,
            cell.accuracy.mean,
            cell.accuracy.std
        );
    }
    out.finish("run-virtual", &config.to_json())
}

fn load_sessions(
    manifest_path: &Path,
    config: &PipelineConfig,
) -> Result<(Vec<ProcessedRecording>, Vec<ProcessedRecording>), CliError> {
    let manifest: SessionsManifest = serde_json::from_str(&read_to_string(manifest_path)?)
        .map_err(|e| CliError::Validation(format!("sessions manifest: {e}")))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for entry in &manifest.sessions {
        let path = base.join(&entry.file);
        let streams = read_imu_csv(&read_to_string(&path)?)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let processed = process_session(entry.label, &streams, config)?;
        match entry.split {
            Split::Train => train.push(processed),
            Split::Test => test.push(processed),
        }
    }
    if train.is_empty() || test.is_empty() {
        return Err(CliError::Validation(
            "sessions manifest must list at least one train and one test session".into(),
        ));
    }
    Ok((train, test))
}

pub fn run_wearable(
    common: &CommonArgs,
    sessions: &Path,
    no_augment: bool,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let (train, test) = load_sessions(sessions, &config)?;
    let outputs = pipeline::run_wearable(&config, &train, &test, !no_augment)?;

    let mut out = OutputDir::create(&common.out_dir)?;
    out.write(
        "wearable_report.json",
        &serde_json::to_string_pretty(&outputs.report).expect("report serialization cannot fail"),
    )?;

    let mut similarity_csv = String::new();
    for row in &outputs.similarity {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        similarity_csv.push_str(&cells.join(","));
        similarity_csv.push('\n');
    }
    out.write("similarity_matrix.csv", &similarity_csv)?;

    let mut ova_csv = String::from("test_label,train_label,lambda_phi,lambda_theta,lambda\n");
    for report in &outputs.one_vs_all {
        for (train_label, score) in report.scores.iter().enumerate() {
            ova_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                report.test_label,
                train_label + 1,
                score.lambda_phi,
                score.lambda_theta,
                score.lambda
            ));
        }
    }
    out.write("one_vs_all.csv", &ova_csv)?;

    for cell in &outputs.report.cells {
        println!(
            "({}, {}): macro-F1 {:.4} +/- {:.4}, accuracy {:.4} +/- {:.4}",
            cell.sigma_phi_sq,
            cell.sigma_theta_sq,
            cell.macro_f1.mean,
            cell.macro_f1.std,
            cell.accuracy.mean,
            cell.accuracy.std
        );
    }
    out.finish("run-wearable", &config.to_json())
}

pub fn fuse(common: &CommonArgs, input: &Path) -> Result<(), CliError> {
    let config = load_config(common)?;
    let streams = read_imu_csv(&read_to_string(input)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", input.display())))?;
    let tolerance_us = (0.5e6 / config.rate_hz).round() as i64;
    let mut per_joint = Vec::new();
    for stream in &streams {
        let (parent, _) = estimate_stream_orientation(
            &stream.parent,
            config.beta,
            UnitQuaternion::identity(),
            config.rate_hz,
        )
        .map_err(|e| CliError::Validation(e.to_string()))?;
        let (child, _) = estimate_stream_orientation(
            &stream.child,
            config.beta,
            UnitQuaternion::identity(),
            config.rate_hz,
        )
        .map_err(|e| CliError::Validation(e.to_string()))?;
        let (fused, _) = fuse_module(&parent, &child, tolerance_us)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        per_joint.push((stream.module_id, fused));
    }
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write("orientations.csv", &write_orientation_csv(&per_joint))?;
    out.finish("fuse", &config.to_json())
}

fn single_setting(config: &PipelineConfig) -> Result<(f64, f64), CliError> {
    match &config.augmentation {
        AugmentationPlan::Single {
            sigma_phi_sq,
            sigma_theta_sq,
        } => Ok((*sigma_phi_sq, *sigma_theta_sq)),
        AugmentationPlan::PaperGrid => Err(CliError::Validation(
            "this command needs a single augmentation setting, not the full grid".into(),
        )),
    }
}

pub fn augment(
    common: &CommonArgs,
    postures: &Path,
    count: Option<usize>,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let set: CanonicalPostureSet = serde_json::from_str(&read_to_string(postures)?)
        .map_err(|e| CliError::Validation(format!("posture manifest: {e}")))?;
    let dict = set
        .dictionary()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let (sigma_phi_sq, sigma_theta_sq) = single_setting(&config)?;
    let settings = AugmentSettings::new(
        sigma_phi_sq,
        sigma_theta_sq,
        count.unwrap_or(config.wearable_train_count),
        config.seed,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let dataset = build_training_dictionary(&dict, &settings);
    let manifest = DatasetManifest {
        settings,
        class_count: dataset.class_count,
        rows: dataset.len(),
        provenance: format!("augment --postures {} --seed {}", postures.display(), config.seed),
    };
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write("dataset.csv", &dataset_to_csv(&dataset))?;
    out.write(
        "dataset.manifest.json",
        &serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail"),
    )?;
    out.finish("augment", &config.to_json())
}

fn manifest_path_for(dataset: &Path) -> std::path::PathBuf {
    let mut name = dataset
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "dataset".to_string());
    name.push_str(".manifest.json");
    dataset.with_file_name(name)
}

fn load_dataset(path: &Path) -> Result<AugmentedDataset, CliError> {
    let manifest_path = manifest_path_for(path);
    let manifest: DatasetManifest = serde_json::from_str(&read_to_string(&manifest_path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", manifest_path.display())))?;
    dataset_from_csv(&read_to_string(path)?, &manifest)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn train(common: &CommonArgs, dataset_path: &Path) -> Result<(), CliError> {
    let config = load_config(common)?;
    let dataset = load_dataset(dataset_path)?;
    let mut strategy = posture_core::classifier::RandomSearch::new(config.seed);
    let tuned = tune_hyperparameters(
        &dataset,
        config.search.budget,
        &mut strategy,
        &config.solver,
        config.seed,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let model = train_ecoc(&dataset, tuned.c, tuned.gamma, &config.solver)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    println!(
        "trained: C = {:.6}, gamma = {:.6}, validation macro-F1 = {:.4}",
        tuned.c, tuned.gamma, tuned.validation_score
    );
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write("model.json", &model_to_json(&model))?;
    out.finish("train", &config.to_json())
}

pub fn predict(common: &CommonArgs, model_path: &Path, dataset_path: &Path) -> Result<(), CliError> {
    let config = load_config(common)?;
    let model = model_from_json(&read_to_string(model_path)?)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let dataset = load_dataset(dataset_path)?;
    let mut csv = String::from("row,label,predicted\n");
    for (i, (row, label)) in dataset
        .features
        .iter()
        .zip(dataset.labels.iter())
        .enumerate()
    {
        let (pred, _) = ecoc_predict(&model, row);
        csv.push_str(&format!("{i},{label},{pred}\n"));
    }
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write("predictions.csv", &csv)?;
    out.finish("predict", &config.to_json())
}

#[derive(serde::Serialize)]
struct MetricsReport {
    accuracy: f64,
    macro_f1: f64,
    per_class_f1: Vec<f64>,
    degenerate_classes: Vec<usize>,
    confusion: Vec<Vec<usize>>,
    confusion_row_norm: Vec<Vec<f64>>,
    runs: Vec<serde_json::Value>,
}

pub fn evaluate(common: &CommonArgs, predictions: &Path) -> Result<(), CliError> {
    let config = load_config(common)?;
    let text = read_to_string(predictions)?;
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "row,label,predicted" {
                return Err(CliError::Validation(
                    "predictions CSV must start with `row,label,predicted`".into(),
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Validation(format!(
                "line {}: expected 3 fields",
                i + 1
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Validation(format!("line {}: `{s}` is not a label", i + 1)))
        };
        labels.push(parse(fields[1])?);
        preds.push(parse(fields[2])?);
    }
    let k = labels.iter().chain(preds.iter()).copied().max().unwrap_or(0);
    let f1 = f1_report(&preds, &labels, k).map_err(|e| CliError::Validation(e.to_string()))?;
    let confusion =
        ConfusionMatrix::new(&preds, &labels, k).map_err(|e| CliError::Validation(e.to_string()))?;
    let report = MetricsReport {
        accuracy: accuracy(&preds, &labels).map_err(|e| CliError::Validation(e.to_string()))?,
        macro_f1: f1.macro_f1,
        per_class_f1: f1.per_class,
        degenerate_classes: f1.degenerate_classes,
        confusion: confusion.counts().clone(),
        confusion_row_norm: confusion.row_normalized(),
        runs: Vec::new(),
    };
    println!(
        "accuracy {:.4}, macro-F1 {:.4}",
        report.accuracy, report.macro_f1
    );
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write(
        "metrics.json",
        &serde_json::to_string_pretty(&report).expect("report serialization cannot fail"),
    )?;
    out.finish("evaluate", &config.to_json())
}

pub fn similarity(common: &CommonArgs, train: &Path, test: &Path) -> Result<(), CliError> {
    let config = load_config(common)?;
    let train_set = load_dataset(train)?;
    let test_set = load_dataset(test)?;
    let k = train_set.class_count.max(test_set.class_count);

    let train_rows: Vec<([f64; FEATURES_PER_POSE], usize)> = train_set
        .features
        .iter()
        .zip(train_set.labels.iter())
        .map(|(f, l)| (*f, *l))
        .collect();
    let test_rows: Vec<([f64; FEATURES_PER_POSE], usize)> = test_set
        .features
        .iter()
        .zip(test_set.labels.iter())
        .map(|(f, l)| (*f, *l))
        .collect();
    let matrix = similarity_matrix(&test_rows, &train_rows, k, 100_000, config.seed)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let mut csv = String::new();
    for row in &matrix {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }

    let mut ova_csv = String::from("test_label,train_label,lambda_phi,lambda_theta,lambda\n");
    for test_label in 1..=k {
        let rows: Vec<[f64; FEATURES_PER_POSE]> =
            test_set.rows_of_class(test_label).copied().collect();
        if rows.is_empty() {
            continue;
        }
        let test_mean = mean_features(&rows);
        for train_label in 1..=k {
            let train_rows: Vec<[f64; FEATURES_PER_POSE]> =
                train_set.rows_of_class(train_label).copied().collect();
            if train_rows.is_empty() {
                continue;
            }
            let score = lambda_similarity(&test_mean, &mean_features(&train_rows))
                .map_err(|e| CliError::Validation(e.to_string()))?;
            ova_csv.push_str(&format!(
                "{test_label},{train_label},{},{},{}\n",
                score.lambda_phi, score.lambda_theta, score.lambda
            ));
        }
    }

    let mut out = OutputDir::create(&common.out_dir)?;
    out.write("similarity_matrix.csv", &csv)?;
    out.write("one_vs_all.csv", &ova_csv)?;
    out.finish("similarity", &config.to_json())
}

pub fn export_features(common: &CommonArgs, train: &Path, test: &Path) -> Result<(), CliError> {
    let config = load_config(common)?;
    let train_set = load_dataset(train)?;
    let test_set = load_dataset(test)?;
    let train_rows: Vec<([f64; FEATURES_PER_POSE], usize)> = train_set
        .features
        .iter()
        .zip(train_set.labels.iter())
        .map(|(f, l)| (*f, *l))
        .collect();
    let test_rows: Vec<([f64; FEATURES_PER_POSE], usize)> = test_set
        .features
        .iter()
        .zip(test_set.labels.iter())
        .map(|(f, l)| (*f, *l))
        .collect();
    let csv = export_features_csv(&[("train", &train_rows), ("test", &test_rows)]);
    let mut out = OutputDir::create(&common.out_dir)?;
    out.write("features.csv", &csv)?;
    out.finish("export-features", &config.to_json())
}
